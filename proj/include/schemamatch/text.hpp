#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace schemamatch {

// Identifier key: trimmed and ASCII-lowercased. Two identifiers are the
// same name iff their keys are equal.
std::string ident_key(std::string_view name);
bool ident_equal(std::string_view a, std::string_view b);

std::string trim(std::string_view s);

// Splits snake_case / camelCase / punctuation into lowercase tokens joined
// by single spaces: "CustomerID_code" -> "customer id code".
std::string normalize_name(std::string_view text);

// Character 3-grams of an already-normalized string. Strings shorter than
// three bytes yield one gram right-padded with '#'.
std::vector<std::string> char_trigrams(std::string_view normalized);

// Multiset of trigrams as gram -> count.
std::map<std::string, int> trigram_counts(std::string_view normalized);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace schemamatch
