#include "schemamatch/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <set>

#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

const Table& table_of(const Schema& s, std::string_view name) {
    const Table* t = s.find_table(name);
    if (!t) throw ResolutionError("table '" + std::string(name) + "' not in schema '" + s.name + "'");
    return *t;
}

std::vector<Table> tables_named(const Schema& s, std::span<const std::string> names) {
    std::vector<Table> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(table_of(s, n));
    return out;
}

}  // namespace

// --- Config ----------------------------------------------------------------

void SelectionStrategy::validate() const {
    if (kind == StrategyKind::vector_similarity && k < 1) throw ConfigError("vector similarity needs k >= 1");
}

std::string SelectionStrategy::label() const {
    switch (kind) {
        case StrategyKind::none: return "none";
        case StrategyKind::nested_join: return "nested";
        case StrategyKind::vector_similarity: return "vector:" + std::to_string(k);
        case StrategyKind::llm: return "llm";
    }
    return "llm";
}

SelectionStrategy SelectionStrategy::parse(std::string_view text, std::size_t default_k) {
    std::string key = ident_key(text);
    SelectionStrategy s;
    s.k = default_k;
    if (key.rfind("vector", 0) == 0) {
        s.kind = StrategyKind::vector_similarity;
        const auto colon = key.find(':');
        if (colon != std::string::npos) {
            try {
                std::size_t used = 0;
                const long k = std::stol(key.substr(colon + 1), &used);
                if (used != key.size() - colon - 1 || k < 1) throw std::invalid_argument("k");
                s.k = static_cast<std::size_t>(k);
            } catch (const std::exception&) {
                throw ConfigError("bad k in strategy '" + std::string(text) + "'");
            }
        } else if (key != "vector" && key != "vector_similarity") {
            throw ConfigError("unknown strategy '" + std::string(text) + "'");
        }
    } else if (key == "none") {
        s.kind = StrategyKind::none;
    } else if (key == "nested" || key == "nested_join") {
        s.kind = StrategyKind::nested_join;
    } else if (key == "llm") {
        s.kind = StrategyKind::llm;
    } else {
        throw ConfigError("unknown strategy '" + std::string(text) + "' (expected none, nested, vector, llm)");
    }
    s.validate();
    return s;
}

const char* to_string(Preset preset) {
    switch (preset) {
        case Preset::llmatch: return "llmatch";
        case Preset::rematch: return "rematch";
        case Preset::custom: return "custom";
    }
    return "custom";
}

Preset parse_preset(std::string_view text) {
    const std::string key = ident_key(text);
    if (key == "llmatch") return Preset::llmatch;
    if (key == "rematch") return Preset::rematch;
    if (key == "custom") return Preset::custom;
    throw ConfigError("unknown preset '" + std::string(text) + "' (expected llmatch, rematch)");
}

void PipelineConfig::validate() const {
    strategy.validate();
    if (drilldown_enabled && !rollup_enabled) throw ConfigError("drilldown requires rollup to be enabled");
    if (preset == Preset::rematch) {
        if (strategy.kind != StrategyKind::vector_similarity)
            throw ConfigError("preset rematch requires the vector similarity strategy");
        if (rollup_enabled || drilldown_enabled) throw ConfigError("preset rematch disables rollup and drilldown");
    }
    if (budget) budget->validate();
    if (max_concurrency == 0) throw ConfigError("llm.max_concurrency must be >= 1");
}

PipelineConfig PipelineConfig::from_preset(Preset preset) {
    PipelineConfig cfg;
    cfg.preset = preset;
    if (preset == Preset::rematch) {
        cfg.strategy = {StrategyKind::vector_similarity, 5};
        cfg.rollup_enabled = false;
        cfg.drilldown_enabled = false;
    }
    return cfg;
}

// --- Rollup ----------------------------------------------------------------

RolledSchema build_rolled_schema(Schema base, RollupRegistry registry) {
    std::vector<std::string> errors;
    // (table key, member key) of every rolled-up column.
    std::set<std::pair<std::string, std::string>> members;
    for (const auto& g : registry.groups()) {
        const Table* t = base.find_table(g.table);
        if (!t) {
            errors.push_back("rollup group '" + g.alias + "' names unknown table '" + g.table + "'");
            continue;
        }
        if (g.members.size() < 2) errors.push_back("rollup group '" + g.alias + "' has fewer than two members");
        if (t->find_column(g.alias)) errors.push_back("alias '" + g.alias + "' collides with a column of '" + t->name + "'");
        for (const auto& m : g.members) {
            if (!t->find_column(m)) errors.push_back("rollup group '" + g.alias + "' names unknown column '" + m + "'");
            if (!members.emplace(ident_key(t->name), ident_key(m)).second)
                errors.push_back("column '" + t->name + "." + m + "' is in more than one group");
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));

    auto rolled = [&](std::string_view table, std::string_view column) {
        return members.count({ident_key(table), ident_key(column)}) > 0;
    };

    Schema view = base;
    for (auto& t : view.tables) {
        const auto groups = registry.groups_of(t.name);
        if (groups.empty()) continue;
        std::vector<Column> cols;
        std::set<const RollupGroup*> placed;
        for (const auto& c : t.columns) {
            const RollupGroup* owner = nullptr;
            for (const auto* g : groups)
                for (const auto& m : g->members)
                    if (ident_equal(m, c.name)) owner = g;
            if (!owner) {
                cols.push_back(c);
            } else if (placed.insert(owner).second) {
                cols.push_back(Column{owner->alias, "", owner->alias_description, false});
            }
        }
        t.columns = std::move(cols);
    }
    for (auto& t : view.tables) {
        std::erase_if(t.foreign_keys, [&](const ForeignKey& fk) {
            return rolled(t.name, fk.column) || rolled(fk.ref_table, fk.ref_column);
        });
    }
    return {std::move(base), std::move(registry), std::move(view)};
}

RolledSchema apply_rollup(const Schema& schema, Gateway& gateway, const ElementConfig& cfg, Warnings& warnings) {
    RollupRegistry registry;
    for (const auto& t : schema.tables)
        for (auto& g : gateway.request_rollup(schema.name, t, cfg, warnings)) registry.add(std::move(g));
    return build_rolled_schema(schema, std::move(registry));
}

// --- Budgeting -------------------------------------------------------------

std::vector<std::vector<std::size_t>> split_batches(std::span<const BatchItem> items, const Budget& budget,
                                                    std::size_t fixed_cost) {
    std::vector<std::vector<std::size_t>> batches;
    if (items.empty()) return batches;
    if (!budget) {
        batches.emplace_back(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) batches[0][i] = i;
        return batches;
    }
    budget->validate();
    const std::size_t limit = budget->max_words_per_prompt;
    const std::size_t base = fixed_cost + budget->overhead_words;
    for (const auto& item : items)
        if (base + item.words > limit) throw BudgetTooSmall(item.name, base + item.words, limit);

    std::size_t used = base;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (batches.empty() || used + items[i].words > limit) {
            batches.emplace_back();
            used = base;
        }
        batches.back().push_back(i);
        used += items[i].words;
    }
    return batches;
}

void check_budget(const Schema& source_view, const Schema& target_view, const ElementConfig& cfg,
                  const Budget& budget) {
    if (!budget) return;
    budget->validate();
    auto largest = [&](const Schema& s) {
        std::pair<std::size_t, std::string> best{0, ""};
        for (const auto& t : s.tables) {
            const std::size_t w = word_count(serialize_table(t, cfg));
            if (w > best.first) best = {w, t.name};
        }
        return best;
    };
    const auto [src_words, src_name] = largest(source_view);
    const auto [tgt_words, tgt_name] = largest(target_view);
    const std::size_t need = src_words + tgt_words + budget->overhead_words;
    if (need > budget->max_words_per_prompt)
        throw BudgetTooSmall("largest source table " + src_name + " with largest target table " + tgt_name,
                             need, budget->max_words_per_prompt);
}

// --- Selection and matching ------------------------------------------------

CandidateSet select_tables(const SelectionStrategy& strategy, const Table& source, const RolledSchema& target,
                           Gateway& gateway, EmbeddingProvider& provider, const ElementConfig& cfg,
                           const Budget& budget, Warnings& warnings, StageCounters* counters) {
    strategy.validate();
    const auto& targets = target.view.tables;
    if (targets.empty()) throw ConfigError("target schema '" + target.view.name + "' has no tables");
    CandidateSet out{source.name, {}, strategy};

    switch (strategy.kind) {
        case StrategyKind::none:
        case StrategyKind::nested_join:
            for (const auto& t : targets) out.candidates.push_back(t.name);
            break;
        case StrategyKind::vector_similarity:
            out.candidates = rank_tables_topk(source, targets, strategy.k, cfg, provider);
            break;
        case StrategyKind::llm: {
            std::vector<BatchItem> items;
            for (const auto& t : targets) items.push_back({t.name, word_count(serialize_table(t, cfg))});
            const auto batches = split_batches(items, budget, word_count(serialize_table(source, cfg)));
            std::set<std::string> seen;
            for (const auto& batch : batches) {
                std::vector<Table> subset;
                for (std::size_t i : batch) subset.push_back(targets[i]);
                for (auto& name : gateway.request_table_selection(source, subset, cfg, warnings))
                    if (seen.insert(ident_key(name)).second) out.candidates.push_back(std::move(name));
            }
            if (counters) counters->batches += batches.size();
            break;
        }
    }
    return out;
}

std::vector<Correspondence> match_columns(const Table& source, const CandidateSet& candidates,
                                          const RolledSchema& target, Gateway& gateway, const ElementConfig& cfg,
                                          const Budget& budget, Warnings& warnings, StageCounters* counters) {
    std::vector<Correspondence> out;
    if (candidates.candidates.empty()) return out;
    const std::vector<Table> tables = tables_named(target.view, candidates.candidates);

    std::vector<std::vector<std::size_t>> batches;
    if (candidates.strategy_used.kind == StrategyKind::nested_join) {
        // One prompt per pair; never split further.
        for (std::size_t i = 0; i < tables.size(); ++i) batches.push_back({i});
    } else {
        std::vector<BatchItem> items;
        for (const auto& t : tables) items.push_back({t.name, word_count(serialize_table(t, cfg))});
        batches = split_batches(items, budget, word_count(serialize_table(source, cfg)));
    }
    if (counters) counters->batches += batches.size();

    std::set<MatchSet::Key> seen;
    for (const auto& batch : batches) {
        std::vector<Table> subset;
        for (std::size_t i : batch) subset.push_back(tables[i]);
        for (auto& c : gateway.request_column_matches(source, subset, cfg, warnings))
            if (seen.insert(MatchSet::key_of(c.source, c.target)).second) out.push_back(std::move(c));
    }
    return out;
}

// --- Drilldown -------------------------------------------------------------

MatchSet apply_drilldown(std::span<const Correspondence> pairs, const RolledSchema& source,
                         const RolledSchema& target, Gateway& gateway, const ElementConfig& cfg, Warnings& warnings,
                         std::vector<DrilldownRecord>* log) {
    MatchSet out;
    for (const auto& pair : pairs) {
        const RollupGroup* sg = source.registry.find(pair.source.table, pair.source.column);
        const RollupGroup* tg = target.registry.find(pair.target.table, pair.target.column);
        if (!sg && !tg) {
            out.insert(pair);
            continue;
        }
        DrilldownSide s{&table_of(source.base, pair.source.table), std::nullopt, {pair.source.column}};
        DrilldownSide t{&table_of(target.base, pair.target.table), std::nullopt, {pair.target.column}};
        if (sg) {
            s.alias = sg->alias;
            s.columns = sg->members;
        }
        if (tg) {
            t.alias = tg->alias;
            t.columns = tg->members;
        }
        auto refined = gateway.request_drilldown(pair, s, t, cfg, warnings);
        for (const auto& c : refined) out.insert(c);
        if (log) log->push_back({pair, std::move(refined)});
    }
    return out;
}

MatchSet expand_aliases(std::span<const Correspondence> pairs, const RolledSchema& source,
                        const RolledSchema& target) {
    MatchSet out;
    for (const auto& pair : pairs) {
        std::vector<std::string> src{pair.source.column};
        std::vector<std::string> tgt{pair.target.column};
        if (const auto* g = source.registry.find(pair.source.table, pair.source.column)) src = g->members;
        if (const auto* g = target.registry.find(pair.target.table, pair.target.column)) tgt = g->members;
        for (const auto& s : src)
            for (const auto& t : tgt)
                out.insert({{pair.source.table, s}, {pair.target.table, t}, pair.stage, pair.confidence});
    }
    return out;
}

// --- Report ----------------------------------------------------------------

Json RunReport::to_json(bool include_timings) const {
    Json tables_json = Json::array();
    for (const auto& t : tables) {
        tables_json.push_back({{"source_table", t.source_table},
                               {"candidates", t.candidates},
                               {"candidate_count", t.candidates.size()},
                               {"selection_batches", t.selection_batches},
                               {"matching_batches", t.matching_batches},
                               {"pairs", t.pairs}});
    }
    Json doc{{"preset", preset},
             {"strategy", strategy},
             {"elements", elements},
             {"rollup", rollup},
             {"drilldown", drilldown},
             {"budget", budget ? Json{{"max_words_per_prompt", budget->max_words_per_prompt},
                                      {"overhead_words", budget->overhead_words}}
                               : Json(nullptr)},
             {"prompt_count", gateway.prompts},
             {"prompts_by_kind", gateway.prompts_by_kind},
             {"retries", gateway.retries},
             {"words_sent", gateway.words_sent},
             {"source_aliases", source_aliases},
             {"target_aliases", target_aliases},
             {"batches", batches},
             {"mean_candidate_count", mean_candidate_count},
             {"tables", std::move(tables_json)},
             {"warnings", warnings}};
    if (include_timings) {
        doc["timings_ms"] = {{"rollup", timings.rollup_ms},
                             {"selection", timings.selection_ms},
                             {"matching", timings.matching_ms},
                             {"drilldown", timings.drilldown_ms},
                             {"total", timings.total_ms}};
    }
    return doc;
}

// --- Driver ----------------------------------------------------------------

namespace {

struct TableOutcome {
    TableReport report;
    std::vector<Correspondence> pairs;
    std::vector<DrilldownRecord> drilldowns;
    Warnings warnings;
    double selection_ms = 0.0;
    double matching_ms = 0.0;
    double drilldown_ms = 0.0;
};

TableOutcome process_table(const Table& source_table, const RolledSchema& source, const RolledSchema& target,
                           const PipelineConfig& cfg, Gateway& gateway, EmbeddingProvider& provider) {
    TableOutcome out;
    out.report.source_table = source_table.name;

    auto t0 = Clock::now();
    StageCounters selection;
    const CandidateSet cand = select_tables(cfg.strategy, source_table, target, gateway, provider, cfg.elements,
                                            cfg.budget, out.warnings, &selection);
    out.selection_ms = elapsed_ms(t0);
    out.report.candidates = cand.candidates;
    out.report.selection_batches = selection.batches;

    t0 = Clock::now();
    StageCounters matching;
    const auto coarse =
        match_columns(source_table, cand, target, gateway, cfg.elements, cfg.budget, out.warnings, &matching);
    out.matching_ms = elapsed_ms(t0);
    out.report.matching_batches = matching.batches;

    t0 = Clock::now();
    MatchSet refined;
    if (cfg.drilldown_enabled)
        refined = apply_drilldown(coarse, source, target, gateway, cfg.elements, out.warnings, &out.drilldowns);
    else
        refined = expand_aliases(coarse, source, target);
    out.drilldown_ms = elapsed_ms(t0);

    out.pairs = refined.to_vector();
    out.report.pairs = out.pairs.size();
    return out;
}

}  // namespace

PipelineResult run_pipeline(const Schema& source, const Schema& target, const PipelineConfig& cfg, Gateway& gateway,
                            EmbeddingProvider& provider) {
    cfg.validate();
    const auto start = Clock::now();
    PipelineResult result;
    RunReport& report = result.report;
    report.preset = to_string(cfg.preset);
    report.strategy = cfg.strategy.label();
    report.elements = cfg.elements.label();
    report.rollup = cfg.rollup_enabled;
    report.drilldown = cfg.drilldown_enabled;
    report.budget = cfg.budget;

    auto t0 = Clock::now();
    if (cfg.rollup_enabled && cfg.rollup_source)
        result.source = apply_rollup(source, gateway, cfg.elements, report.warnings);
    else
        result.source = build_rolled_schema(source, {});
    if (cfg.rollup_enabled && cfg.rollup_target)
        result.target = apply_rollup(target, gateway, cfg.elements, report.warnings);
    else
        result.target = build_rolled_schema(target, {});
    report.timings.rollup_ms = elapsed_ms(t0);
    report.source_aliases = result.source.registry.size();
    report.target_aliases = result.target.registry.size();

    check_budget(result.source.view, result.target.view, cfg.elements, cfg.budget);

    const auto& tables = result.source.view.tables;
    std::vector<TableOutcome> outcomes(tables.size());
    for (std::size_t begin = 0; begin < tables.size(); begin += cfg.max_concurrency) {
        const std::size_t end = std::min(tables.size(), begin + cfg.max_concurrency);
        if (end - begin == 1) {
            outcomes[begin] = process_table(tables[begin], result.source, result.target, cfg, gateway, provider);
            continue;
        }
        std::vector<std::future<TableOutcome>> wave;
        for (std::size_t i = begin; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, [&, i] {
                return process_table(tables[i], result.source, result.target, cfg, gateway, provider);
            }));
        }
        for (std::size_t i = begin; i < end; ++i) outcomes[i] = wave[i - begin].get();
    }

    // Merge in schema order.
    double candidate_total = 0.0;
    for (auto& o : outcomes) {
        for (auto& c : o.pairs) result.matches.insert(std::move(c));
        for (auto& d : o.drilldowns) result.drilldowns.push_back(std::move(d));
        report.warnings.insert(report.warnings.end(), o.warnings.begin(), o.warnings.end());
        report.timings.selection_ms += o.selection_ms;
        report.timings.matching_ms += o.matching_ms;
        report.timings.drilldown_ms += o.drilldown_ms;
        report.batches += o.report.selection_batches + o.report.matching_batches;
        candidate_total += static_cast<double>(o.report.candidates.size());
        report.tables.push_back(std::move(o.report));
    }
    if (!tables.empty()) report.mean_candidate_count = candidate_total / static_cast<double>(tables.size());
    report.gateway = gateway.counters();
    report.timings.total_ms = elapsed_ms(start);
    return result;
}

}  // namespace schemamatch
