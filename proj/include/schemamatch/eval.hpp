#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schemamatch/embedding.hpp"
#include "schemamatch/llm.hpp"
#include "schemamatch/pipeline.hpp"
#include "schemamatch/schema.hpp"

namespace schemamatch {

// Follows FK columns to the referenced PK, transitively. On a reference
// cycle the member with the smallest key is returned, which keeps the
// mapping idempotent. Throws ResolutionError if `ref` does not resolve.
ColumnRef canonicalize_ref(const ColumnRef& ref, const Schema& schema);

struct PairCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    bool operator==(const PairCounts&) const = default;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::map<std::string, PairCounts> per_source_table;  // keyed by canonical source table

    Json to_json() const;
};

EvalReport evaluate_f1(const MatchSet& pred, const MatchSet& gold, const Schema& source, const Schema& target);

// --- Experiments -----------------------------------------------------------

struct DatasetSpec {
    std::string name;
    std::filesystem::path source;
    std::filesystem::path target;
    std::filesystem::path gold;
};

struct Dataset {
    std::string name;
    Schema source;
    Schema target;
    MatchSet gold;
};

Dataset load_dataset(const DatasetSpec& spec);

struct ExperimentGrid {
    std::vector<DatasetSpec> datasets;
    std::vector<ElementConfig> element_configs;
    std::vector<SelectionStrategy> strategies;
    std::vector<Budget> budgets;  // ascending; an unlimited entry may only come last
    PipelineConfig base;          // strategy, elements and budget are overridden per cell

    // Throws ConfigError on an empty axis or unsorted budgets.
    void validate() const;

    // {"datasets": [{"name","source","target","gold"}], "elements": ["name,desc"],
    //  "strategies": ["llm"], "budgets": [200, null], "rollup": bool,
    //  "drilldown": bool, "preset": "..."}; relative paths resolve against `base_dir`.
    static ExperimentGrid from_json(const Json& doc, const std::filesystem::path& base_dir);
    static ExperimentGrid from_file(const std::filesystem::path& path);
};

// Builds a fresh client per run so scripted queues start over each cell.
using ClientFactory = std::function<std::unique_ptr<CompletionClient>(const Dataset&)>;

struct AblationRow {
    std::string dataset;
    std::string elements;
    std::string strategy;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double mean_candidates = 0.0;
    std::string error;  // "Kind: message" when the cell failed
};

// One run per (dataset, elements, strategy) cell, in grid order, with the
// last (largest) budget of the grid. Cell errors land in the row.
std::vector<AblationRow> run_ablation(const ExperimentGrid& grid, const ClientFactory& clients,
                                      EmbeddingProvider& provider, int retries = 2);

struct ScalabilityRow {
    std::string dataset;
    std::optional<std::size_t> budget_words;  // nullopt = unlimited
    std::optional<double> f1;
    std::string error;
    std::size_t prompt_count = 0;
    std::size_t batches = 0;
};

std::vector<ScalabilityRow> run_scalability(std::span<const Budget> budgets, const Dataset& dataset,
                                            const PipelineConfig& cfg, const ClientFactory& clients,
                                            EmbeddingProvider& provider, int retries = 2);

struct StatsRow {
    std::string dataset;
    SchemaStats source;
    SchemaStats target;
    MappingStats mapping;
};

StatsRow dataset_stats(const Dataset& dataset);

// CSV with pinned headers; reals printed with six decimals.
std::string ablation_csv(std::span<const AblationRow> rows);
std::string scalability_csv(std::span<const ScalabilityRow> rows);
std::string stats_csv(std::span<const StatsRow> rows);

}  // namespace schemamatch
