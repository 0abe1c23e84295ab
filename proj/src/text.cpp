#include "schemamatch/text.hpp"

#include <cctype>
#include <cstdint>

namespace schemamatch {

namespace {

bool is_ascii(unsigned char c) { return c < 0x80; }

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string ident_key(std::string_view name) {
    std::string out = trim(name);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool ident_equal(std::string_view a, std::string_view b) { return ident_key(a) == ident_key(b); }

std::string normalize_name(std::string_view text) {
    std::string out;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        if (!out.empty()) out.push_back(' ');
        out += token;
        token.clear();
    };
    // `last` tracks the case of the previous ASCII character in the token.
    char last = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (!is_ascii(c)) {
            token.push_back(static_cast<char>(c));
            last = 0;
            continue;
        }
        if (!std::isalnum(c)) {
            flush();
            last = 0;
            continue;
        }
        if (std::isupper(c) && !token.empty()) {
            const bool next_lower =
                i + 1 < text.size() && std::islower(static_cast<unsigned char>(text[i + 1]));
            if (std::islower(static_cast<unsigned char>(last)) ||
                std::isdigit(static_cast<unsigned char>(last)) ||
                (std::isupper(static_cast<unsigned char>(last)) && next_lower)) {
                flush();
            }
        }
        last = static_cast<char>(c);
        token.push_back(static_cast<char>(std::tolower(c)));
    }
    flush();
    return out;
}

std::vector<std::string> char_trigrams(std::string_view normalized) {
    if (normalized.size() < 3) {
        std::string g(normalized);
        g.resize(3, '#');
        return {g};
    }
    std::vector<std::string> grams;
    grams.reserve(normalized.size() - 2);
    for (std::size_t i = 0; i + 3 <= normalized.size(); ++i) grams.emplace_back(normalized.substr(i, 3));
    return grams;
}

std::map<std::string, int> trigram_counts(std::string_view normalized) {
    std::map<std::string, int> counts;
    for (auto& g : char_trigrams(normalized)) ++counts[g];
    return counts;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace schemamatch
