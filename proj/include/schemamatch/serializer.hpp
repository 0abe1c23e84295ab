#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "schemamatch/schema.hpp"

namespace schemamatch {

// Which schema elements reach prompts and embeddings. Names are always
// rendered.
struct ElementConfig {
    bool include_descriptions = true;
    bool include_keys = true;
    bool include_types = true;

    static constexpr bool include_names = true;

    static ElementConfig names_only() { return {false, false, false}; }
    static ElementConfig all() { return {true, true, true}; }

    // Flag-wise <=.
    bool subset_of(const ElementConfig& other) const;
    // "name,desc,keys,types" style label; parse accepts the same tokens.
    std::string label() const;
    static ElementConfig parse(std::string_view spec);

    bool operator==(const ElementConfig&) const = default;
};

struct BudgetConfig {
    std::size_t max_words_per_prompt = 0;
    std::size_t overhead_words = 0;

    // Throws ConfigError unless max_words_per_prompt > overhead_words.
    void validate() const;
    std::size_t capacity() const { return max_words_per_prompt - overhead_words; }
};

// Unset means unlimited.
using Budget = std::optional<BudgetConfig>;

// One column per line:  column <name> : <type> <DASH> <description> [PK] [FK→t.c]
// where DASH is U+2014 surrounded by single spaces.
std::string serialize_column(const Table& table, const Column& column, const ElementConfig& cfg);
std::string serialize_table(const Table& table, const ElementConfig& cfg);
// Table renders separated by one blank line, in schema order.
std::string serialize_schema(const Schema& schema, const ElementConfig& cfg);

// Number of maximal runs of non-whitespace (Unicode White_Space) in UTF-8 text.
std::size_t word_count(std::string_view text);

}  // namespace schemamatch
