#include "schemamatch/serializer.hpp"

#include <cstdint>

#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

namespace {

bool is_unicode_space(std::uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one code point starting at `i`, advancing it. Invalid sequences
// decode byte-wise as non-space.
std::uint32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    std::uint32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

}  // namespace

bool ElementConfig::subset_of(const ElementConfig& o) const {
    return (!include_descriptions || o.include_descriptions) && (!include_keys || o.include_keys) &&
           (!include_types || o.include_types);
}

std::string ElementConfig::label() const {
    std::string out = "name";
    if (include_descriptions) out += ",desc";
    if (include_keys) out += ",keys";
    if (include_types) out += ",types";
    return out;
}

ElementConfig ElementConfig::parse(std::string_view spec) {
    ElementConfig cfg = names_only();
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        auto end = spec.find_first_of(",+", pos);
        if (end == std::string_view::npos) end = spec.size();
        const std::string tok = ident_key(spec.substr(pos, end - pos));
        if (tok == "name" || tok == "names") {
        } else if (tok == "desc" || tok == "descriptions") {
            cfg.include_descriptions = true;
        } else if (tok == "keys" || tok == "key") {
            cfg.include_keys = true;
        } else if (tok == "types" || tok == "type") {
            cfg.include_types = true;
        } else if (tok == "all") {
            cfg = all();
        } else if (!tok.empty()) {
            throw ConfigError("unknown schema element '" + tok + "' (expected name, desc, keys, types)");
        }
        pos = end + 1;
    }
    return cfg;
}

void BudgetConfig::validate() const {
    if (max_words_per_prompt == 0) throw ConfigError("budget: max_words_per_prompt must be > 0");
    if (max_words_per_prompt <= overhead_words)
        throw ConfigError("budget: max_words_per_prompt must exceed overhead_words");
}

std::string serialize_column(const Table& table, const Column& column, const ElementConfig& cfg) {
    std::string line = "column " + column.name;
    if (cfg.include_types && !column.data_type.empty()) line += " : " + column.data_type;
    if (cfg.include_descriptions && !column.description.empty()) line += " — " + column.description;
    if (cfg.include_keys) {
        if (column.is_primary_key) line += " [PK]";
        for (const auto& fk : table.foreign_keys)
            if (ident_equal(fk.column, column.name)) line += " [FK→" + fk.ref_table + "." + fk.ref_column + "]";
    }
    return line;
}

std::string serialize_table(const Table& table, const ElementConfig& cfg) {
    std::string out = "table " + table.name;
    if (cfg.include_descriptions && !table.description.empty()) out += " — " + table.description;
    out += '\n';
    for (const auto& c : table.columns) {
        out += serialize_column(table, c, cfg);
        out += '\n';
    }
    return out;
}

std::string serialize_schema(const Schema& schema, const ElementConfig& cfg) {
    std::string out;
    for (std::size_t i = 0; i < schema.tables.size(); ++i) {
        if (i) out += '\n';
        out += serialize_table(schema.tables[i], cfg);
    }
    return out;
}

std::size_t word_count(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool space = is_unicode_space(next_code_point(text, i));
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

}  // namespace schemamatch
