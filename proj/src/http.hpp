#pragma once

#include <string>
#include <utility>
#include <vector>

namespace schemamatch::detail {

using Headers = std::vector<std::pair<std::string, std::string>>;

// POSTs a JSON body and returns the response body. Throws std::runtime_error
// on transport failure or a non-2xx status.
std::string http_post_json(const std::string& url, const std::string& body, const Headers& headers,
                           int timeout_seconds);

}  // namespace schemamatch::detail
