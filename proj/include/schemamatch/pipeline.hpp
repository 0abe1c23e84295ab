#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemamatch/embedding.hpp"
#include "schemamatch/llm.hpp"
#include "schemamatch/schema.hpp"
#include "schemamatch/serializer.hpp"

namespace schemamatch {

enum class StrategyKind { none, nested_join, vector_similarity, llm };

struct SelectionStrategy {
    StrategyKind kind = StrategyKind::llm;
    std::size_t k = 5;  // vector_similarity only

    void validate() const;
    // "none", "nested", "vector:5", "llm"
    std::string label() const;
    // Accepts the labels above; "vector" alone keeps `default_k`.
    static SelectionStrategy parse(std::string_view text, std::size_t default_k = 5);

    bool operator==(const SelectionStrategy&) const = default;
};

enum class Preset { llmatch, rematch, custom };

const char* to_string(Preset preset);
Preset parse_preset(std::string_view text);

struct PipelineConfig {
    Preset preset = Preset::custom;
    SelectionStrategy strategy;
    ElementConfig elements;
    bool rollup_enabled = true;
    bool rollup_source = true;
    bool rollup_target = true;
    bool drilldown_enabled = true;
    Budget budget;
    std::size_t max_concurrency = 1;

    // Throws ConfigError on inconsistent settings.
    void validate() const;
    static PipelineConfig from_preset(Preset preset);
};

struct CandidateSet {
    std::string source_table;
    std::vector<std::string> candidates;
    SelectionStrategy strategy_used;
};

// Schema with rolled-up column groups replaced by one alias column each.
// Member keys are not carried onto the alias; FKs touching members are
// dropped from the view.
struct RolledSchema {
    Schema base;
    RollupRegistry registry;
    Schema view;
};

// Throws ValidationError when a group does not fit `base`.
RolledSchema build_rolled_schema(Schema base, RollupRegistry registry);

RolledSchema apply_rollup(const Schema& schema, Gateway& gateway, const ElementConfig& cfg, Warnings& warnings);

struct BatchItem {
    std::string name;
    std::size_t words = 0;
};

// Greedy in-order packing of items into prompts. Each batch satisfies
// fixed_cost + overhead + sum(words) <= max_words_per_prompt. Throws
// BudgetTooSmall naming the first item that cannot fit even alone.
std::vector<std::vector<std::size_t>> split_batches(std::span<const BatchItem> items, const Budget& budget,
                                                    std::size_t fixed_cost);

// Rejects budgets that cannot hold the largest source table together with
// the largest target table.
void check_budget(const Schema& source_view, const Schema& target_view, const ElementConfig& cfg,
                  const Budget& budget);

struct StageCounters {
    std::size_t batches = 0;
};

CandidateSet select_tables(const SelectionStrategy& strategy, const Table& source, const RolledSchema& target,
                           Gateway& gateway, EmbeddingProvider& provider, const ElementConfig& cfg,
                           const Budget& budget, Warnings& warnings, StageCounters* counters = nullptr);

std::vector<Correspondence> match_columns(const Table& source, const CandidateSet& candidates,
                                          const RolledSchema& target, Gateway& gateway, const ElementConfig& cfg,
                                          const Budget& budget, Warnings& warnings, StageCounters* counters = nullptr);

struct DrilldownRecord {
    Correspondence coarse;
    std::vector<Correspondence> refined;
};

// Replaces alias-level pairs by the model's member-level picks; plain pairs
// pass through.
MatchSet apply_drilldown(std::span<const Correspondence> pairs, const RolledSchema& source,
                         const RolledSchema& target, Gateway& gateway, const ElementConfig& cfg, Warnings& warnings,
                         std::vector<DrilldownRecord>* log = nullptr);

// Replaces every alias by all of its members (rollup without drilldown).
MatchSet expand_aliases(std::span<const Correspondence> pairs, const RolledSchema& source,
                        const RolledSchema& target);

struct TableReport {
    std::string source_table;
    std::vector<std::string> candidates;
    std::size_t selection_batches = 0;
    std::size_t matching_batches = 0;
    std::size_t pairs = 0;
};

struct RunReport {
    std::string preset;
    std::string strategy;
    std::string elements;
    bool rollup = false;
    bool drilldown = false;
    std::optional<BudgetConfig> budget;
    GatewayCounters gateway;
    std::size_t source_aliases = 0;
    std::size_t target_aliases = 0;
    std::size_t batches = 0;
    double mean_candidate_count = 0.0;
    std::vector<TableReport> tables;
    Warnings warnings;

    struct Timings {
        double rollup_ms = 0.0;
        double selection_ms = 0.0;
        double matching_ms = 0.0;
        double drilldown_ms = 0.0;
        double total_ms = 0.0;
    } timings;

    Json to_json(bool include_timings = true) const;
};

struct PipelineResult {
    MatchSet matches;
    RunReport report;
    RolledSchema source;
    RolledSchema target;
    std::vector<DrilldownRecord> drilldowns;
};

PipelineResult run_pipeline(const Schema& source, const Schema& target, const PipelineConfig& cfg, Gateway& gateway,
                            EmbeddingProvider& provider);

}  // namespace schemamatch
