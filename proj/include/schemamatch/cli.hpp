#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace schemamatch::cli {

// Runs one command. `args` excludes the program name. Returns 0 on success,
// 1 on validation or configuration errors, 2 on runtime errors; errors are
// written to `err` as a one-line JSON document.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int execute(const std::vector<std::string>& args);

}  // namespace schemamatch::cli
