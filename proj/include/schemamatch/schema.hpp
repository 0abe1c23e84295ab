#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

namespace schemamatch {

using Json = nlohmann::json;
using Warnings = std::vector<std::string>;

struct Column {
    std::string name;
    std::string data_type;
    std::string description;
    bool is_primary_key = false;

    bool operator==(const Column&) const = default;
};

struct ForeignKey {
    std::string column;
    std::string ref_table;
    std::string ref_column;

    bool operator==(const ForeignKey&) const = default;
};

struct Table {
    std::string name;
    std::string description;
    std::vector<Column> columns;
    std::vector<ForeignKey> foreign_keys;

    const Column* find_column(std::string_view name) const;
    // First FK declared on `column`, if any.
    const ForeignKey* foreign_key_of(std::string_view column) const;
    bool is_foreign_key(std::string_view column) const { return foreign_key_of(column) != nullptr; }

    bool operator==(const Table&) const = default;
};

struct Schema {
    std::string name;
    std::vector<Table> tables;

    const Table* find_table(std::string_view name) const;

    bool operator==(const Schema&) const = default;
};

struct ColumnRef {
    std::string table;
    std::string column;

    // "table.column" with identifier keys; used for ordering and tie-breaks.
    std::string key() const;
    std::string display() const { return table + "." + column; }

    bool operator==(const ColumnRef&) const = default;
};

enum class Stage { baseline, llm_match, drilldown };

const char* to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);

struct Correspondence {
    ColumnRef source;
    ColumnRef target;
    std::optional<Stage> stage;
    std::optional<double> confidence;
};

// Set of correspondences keyed on (source, target) identifier keys.
// Iteration is in key order, so two sets with the same pairs iterate
// identically regardless of insertion order.
class MatchSet {
public:
    using Key = std::pair<std::string, std::string>;

    // Returns false if the pair was already present (the first one is kept).
    bool insert(Correspondence c);
    bool contains(const ColumnRef& source, const ColumnRef& target) const;
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }

    auto begin() const { return pairs_.begin(); }
    auto end() const { return pairs_.end(); }

    std::vector<Correspondence> to_vector() const;
    // Same (source, target) pairs; stage and confidence ignored.
    bool same_pairs(const MatchSet& other) const;

    static Key key_of(const ColumnRef& source, const ColumnRef& target);

private:
    std::map<Key, Correspondence> pairs_;
};

struct SchemaStats {
    std::size_t table_count = 0;
    std::size_t column_count = 0;
    std::size_t pk_count = 0;
    std::size_t fk_count = 0;
    double avg_columns_per_table = 0.0;

    bool operator==(const SchemaStats&) const = default;
};

struct MappingStats {
    double avg_target_tables_per_source_table = 0.0;
    double one_to_one_ratio = 0.0;
    std::size_t total_pairs = 0;
};

struct LoadDiagnostics {
    Warnings warnings;
    std::size_t duplicates = 0;
};

// Throws ParseError on a malformed document and ValidationError listing
// every invariant violation.
Schema load_schema(const Json& doc, LoadDiagnostics* diag = nullptr);
Schema load_schema_file(const std::filesystem::path& path, LoadDiagnostics* diag = nullptr);
Json schema_to_json(const Schema& schema);

// Resolves a reference to the schema's stored spelling; nullopt if absent.
std::optional<ColumnRef> resolve(const Schema& schema, std::string_view table, std::string_view column);

MatchSet load_ground_truth(const Json& doc, const Schema& source, const Schema& target,
                           LoadDiagnostics* diag = nullptr);
MatchSet load_ground_truth_file(const std::filesystem::path& path, const Schema& source,
                                const Schema& target, LoadDiagnostics* diag = nullptr);

// Mapping file writer; "stage" and "confidence" are emitted when present.
Json matchset_to_json(const MatchSet& set);

SchemaStats schema_stats(const Schema& schema);
MappingStats mapping_stats(const MatchSet& gold, const Schema& source, const Schema& target);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace schemamatch
