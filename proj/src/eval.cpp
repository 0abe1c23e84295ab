#include "schemamatch/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

ColumnRef canonicalize_ref(const ColumnRef& ref, const Schema& schema) {
    auto current = resolve(schema, ref.table, ref.column);
    if (!current) throw ResolutionError("'" + ref.display() + "' does not resolve in schema '" + schema.name + "'");

    std::vector<ColumnRef> path;
    std::set<std::string> visited;
    while (true) {
        path.push_back(*current);
        visited.insert(current->key());
        const ForeignKey* fk = schema.find_table(current->table)->foreign_key_of(current->column);
        if (!fk) return *current;
        auto next = resolve(schema, fk->ref_table, fk->ref_column);
        if (!next)
            throw ResolutionError("foreign key " + current->display() + " references missing " + fk->ref_table + "." +
                                  fk->ref_column);
        if (visited.count(next->key())) {
            auto it = std::find_if(path.begin(), path.end(), [&](const ColumnRef& r) { return r.key() == next->key(); });
            return *std::min_element(it, path.end(),
                                     [](const ColumnRef& a, const ColumnRef& b) { return a.key() < b.key(); });
        }
        current = std::move(next);
    }
}

namespace {

double safe_ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct CanonicalSet {
    std::set<MatchSet::Key> keys;
    std::map<MatchSet::Key, std::string> source_table;  // display spelling
};

CanonicalSet canonical(const MatchSet& set, const Schema& source, const Schema& target) {
    CanonicalSet out;
    for (const auto& [_, c] : set) {
        const ColumnRef s = canonicalize_ref(c.source, source);
        const ColumnRef t = canonicalize_ref(c.target, target);
        const auto key = MatchSet::key_of(s, t);
        if (out.keys.insert(key).second) out.source_table.emplace(key, s.table);
    }
    return out;
}

}  // namespace

EvalReport evaluate_f1(const MatchSet& pred, const MatchSet& gold, const Schema& source, const Schema& target) {
    const CanonicalSet p = canonical(pred, source, target);
    const CanonicalSet g = canonical(gold, source, target);
    EvalReport r;
    for (const auto& key : p.keys) {
        auto& row = r.per_source_table[p.source_table.at(key)];
        if (g.keys.count(key)) {
            ++r.tp;
            ++row.tp;
        } else {
            ++r.fp;
            ++row.fp;
        }
    }
    for (const auto& key : g.keys) {
        if (p.keys.count(key)) continue;
        ++r.fn;
        ++r.per_source_table[g.source_table.at(key)].fn;
    }

    if (r.tp + r.fp == 0)
        r.precision = r.fn == 0 ? 1.0 : 0.0;
    else
        r.precision = safe_ratio(r.tp, r.tp + r.fp);
    r.recall = r.tp + r.fn == 0 ? 1.0 : safe_ratio(r.tp, r.tp + r.fn);
    const double denom = r.precision + r.recall;
    r.f1 = denom == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / denom;
    return r;
}

Json EvalReport::to_json() const {
    Json tables = Json::object();
    for (const auto& [name, c] : per_source_table) tables[name] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    return {{"precision", precision}, {"recall", recall}, {"f1", f1},  {"tp", tp},
            {"fp", fp},               {"fn", fn},         {"per_source_table", std::move(tables)}};
}

// --- Experiments -----------------------------------------------------------

Dataset load_dataset(const DatasetSpec& spec) {
    Dataset d;
    d.name = spec.name;
    d.source = load_schema_file(spec.source);
    d.target = load_schema_file(spec.target);
    d.gold = load_ground_truth_file(spec.gold, d.source, d.target);
    return d;
}

void ExperimentGrid::validate() const {
    if (datasets.empty()) throw ConfigError("grid has no datasets");
    if (element_configs.empty()) throw ConfigError("grid has no element configs");
    if (strategies.empty()) throw ConfigError("grid has no strategies");
    if (budgets.empty()) throw ConfigError("grid has no budgets");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (!budgets[i]) {
            if (i + 1 != budgets.size()) throw ConfigError("unlimited budget must come last");
            continue;
        }
        budgets[i]->validate();
        if (i > 0 && budgets[i - 1] && budgets[i - 1]->max_words_per_prompt > budgets[i]->max_words_per_prompt)
            throw ConfigError("grid budgets must be sorted ascending");
    }
    for (const auto& s : strategies) s.validate();
}

ExperimentGrid ExperimentGrid::from_json(const Json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ParseError("grid document must be an object");
    ExperimentGrid g;
    try {
        auto path_of = [&](const Json& v) {
            std::filesystem::path p = v.get<std::string>();
            return p.is_relative() ? base_dir / p : p;
        };
        for (const auto& d : doc.at("datasets"))
            g.datasets.push_back(
                {d.at("name").get<std::string>(), path_of(d.at("source")), path_of(d.at("target")), path_of(d.at("gold"))});

        if (doc.contains("preset")) g.base = PipelineConfig::from_preset(parse_preset(doc.at("preset").get<std::string>()));
        g.base.rollup_enabled = doc.value("rollup", g.base.rollup_enabled);
        g.base.drilldown_enabled = doc.value("drilldown", g.base.drilldown_enabled);
        const std::size_t overhead = doc.value("overhead_words", std::size_t{0});

        if (doc.contains("elements"))
            for (const auto& e : doc.at("elements")) g.element_configs.push_back(ElementConfig::parse(e.get<std::string>()));
        else
            g.element_configs.push_back(g.base.elements);

        if (doc.contains("strategies"))
            for (const auto& s : doc.at("strategies")) g.strategies.push_back(SelectionStrategy::parse(s.get<std::string>()));
        else
            g.strategies.push_back(g.base.strategy);

        if (doc.contains("budgets")) {
            for (const auto& b : doc.at("budgets")) {
                if (b.is_null())
                    g.budgets.emplace_back(std::nullopt);
                else
                    g.budgets.emplace_back(BudgetConfig{b.get<std::size_t>(), overhead});
            }
        } else {
            g.budgets.emplace_back(std::nullopt);
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("bad grid document: ") + e.what());
    }
    g.validate();
    return g;
}

ExperimentGrid ExperimentGrid::from_file(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.parent_path());
}

namespace {

std::string error_text(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(err->kind()) + ": " + err->what();
    return e.what();
}

}  // namespace

std::vector<AblationRow> run_ablation(const ExperimentGrid& grid, const ClientFactory& clients,
                                      EmbeddingProvider& provider, int retries) {
    grid.validate();
    std::vector<AblationRow> rows;
    for (const auto& spec : grid.datasets) {
        std::optional<Dataset> data;
        std::string load_error;
        try {
            data = load_dataset(spec);
        } catch (const std::exception& e) {
            load_error = error_text(e);
        }
        for (const auto& elements : grid.element_configs) {
            for (const auto& strategy : grid.strategies) {
                AblationRow row;
                row.dataset = spec.name;
                row.elements = elements.label();
                row.strategy = strategy.label();
                if (!data) {
                    row.error = load_error;
                    rows.push_back(std::move(row));
                    continue;
                }
                try {
                    PipelineConfig cfg = grid.base;
                    cfg.elements = elements;
                    cfg.strategy = strategy;
                    cfg.budget = grid.budgets.back();
                    auto client = clients(*data);
                    Gateway gateway(*client, retries);
                    const auto result = run_pipeline(data->source, data->target, cfg, gateway, provider);
                    const auto eval = evaluate_f1(result.matches, data->gold, data->source, data->target);
                    row.f1 = eval.f1;
                    row.precision = eval.precision;
                    row.recall = eval.recall;
                    row.mean_candidates = result.report.mean_candidate_count;
                } catch (const std::exception& e) {
                    row.error = error_text(e);
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::vector<ScalabilityRow> run_scalability(std::span<const Budget> budgets, const Dataset& dataset,
                                            const PipelineConfig& cfg, const ClientFactory& clients,
                                            EmbeddingProvider& provider, int retries) {
    ExperimentGrid check;
    check.datasets.push_back({dataset.name, {}, {}, {}});
    check.element_configs.push_back(cfg.elements);
    check.strategies.push_back(cfg.strategy);
    check.budgets.assign(budgets.begin(), budgets.end());
    check.validate();

    std::vector<ScalabilityRow> rows;
    for (const auto& budget : budgets) {
        ScalabilityRow row;
        row.dataset = dataset.name;
        if (budget) row.budget_words = budget->max_words_per_prompt;
        try {
            PipelineConfig run_cfg = cfg;
            run_cfg.budget = budget;
            auto client = clients(dataset);
            Gateway gateway(*client, retries);
            const auto result = run_pipeline(dataset.source, dataset.target, run_cfg, gateway, provider);
            row.f1 = evaluate_f1(result.matches, dataset.gold, dataset.source, dataset.target).f1;
            row.prompt_count = result.report.gateway.prompts;
            row.batches = result.report.batches;
        } catch (const BudgetTooSmall& e) {
            row.error = error_text(e);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

StatsRow dataset_stats(const Dataset& dataset) {
    return {dataset.name, schema_stats(dataset.source), schema_stats(dataset.target),
            mapping_stats(dataset.gold, dataset.source, dataset.target)};
}

namespace {

std::string real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Quotes a field when it contains a separator, quote or newline.
std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string ablation_csv(std::span<const AblationRow> rows) {
    std::string out = "dataset,elements,strategy,f1,precision,recall,mean_candidates,error\n";
    for (const auto& r : rows) {
        out += field(r.dataset) + "," + field(r.elements) + "," + field(r.strategy) + ",";
        if (r.error.empty())
            out += real(r.f1) + "," + real(r.precision) + "," + real(r.recall) + "," + real(r.mean_candidates) + ",";
        else
            out += ",,,,";
        out += field(r.error) + "\n";
    }
    return out;
}

std::string scalability_csv(std::span<const ScalabilityRow> rows) {
    std::string out = "dataset,budget_words,f1,error,prompt_count,batches\n";
    for (const auto& r : rows) {
        out += field(r.dataset) + ",";
        out += (r.budget_words ? std::to_string(*r.budget_words) : std::string("unlimited")) + ",";
        out += (r.f1 ? real(*r.f1) : std::string()) + ",";
        out += field(r.error) + "," + std::to_string(r.prompt_count) + "," + std::to_string(r.batches) + "\n";
    }
    return out;
}

std::string stats_csv(std::span<const StatsRow> rows) {
    std::string out =
        "dataset,tables_src,tables_tgt,cols_src,cols_tgt,pk,fk,avg_target_tables_per_source,one_to_one_ratio\n";
    for (const auto& r : rows) {
        out += field(r.dataset) + "," + std::to_string(r.source.table_count) + "," +
               std::to_string(r.target.table_count) + "," + std::to_string(r.source.column_count) + "," +
               std::to_string(r.target.column_count) + "," + std::to_string(r.source.pk_count + r.target.pk_count) +
               "," + std::to_string(r.source.fk_count + r.target.fk_count) + "," +
               real(r.mapping.avg_target_tables_per_source_table) + "," + real(r.mapping.one_to_one_ratio) + "\n";
    }
    return out;
}

}  // namespace schemamatch
