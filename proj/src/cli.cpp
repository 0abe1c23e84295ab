#include "schemamatch/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "schemamatch/baseline.hpp"
#include "schemamatch/embedding.hpp"
#include "schemamatch/errors.hpp"
#include "schemamatch/eval.hpp"
#include "schemamatch/llm.hpp"
#include "schemamatch/pipeline.hpp"
#include "schemamatch/schema.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch::cli {

namespace {

namespace fs = std::filesystem;

// Every key the config file may set, with its default.
const std::map<std::string, std::string>& known_keys() {
    static const std::map<std::string, std::string> keys{
        {"flood.epsilon", "0.0001"},
        {"flood.max_iters", "100"},
        {"flood.threshold", "0.3"},
        {"cupid.w_struct", "0.5"},
        {"cupid.threshold", "0.5"},
        {"llm.client", "remote"},
        {"llm.endpoint", ""},
        {"llm.model", ""},
        {"llm.api_key", ""},
        {"llm.retries", "2"},
        {"llm.max_concurrency", "1"},
        {"llm.temperature", ""},
        {"embed.provider", "local"},
        {"embed.endpoint", ""},
        {"embed.api_key", ""},
        {"embed.dim", "256"},
        {"embed.max_concurrency", "4"},
        {"embed.cache", "embedding_cache.json"},
        {"embed.fallback", "none"},
        {"pipeline.preset", "llmatch"},
        {"pipeline.strategy", "llm"},
        {"pipeline.k", "5"},
        {"pipeline.elements", "name,desc,keys,types"},
        {"pipeline.rollup", "true"},
        {"pipeline.drilldown", "true"},
        {"pipeline.budget", "0"},
        {"pipeline.overhead", "0"},
    };
    return keys;
}

const std::map<std::string, std::string>& env_keys() {
    static const std::map<std::string, std::string> keys{
        {"LLM_ENDPOINT", "llm.endpoint"}, {"LLM_MODEL", "llm.model"},       {"LLM_API_KEY", "llm.api_key"},
        {"EMBED_ENDPOINT", "embed.endpoint"}, {"EMBED_API_KEY", "embed.api_key"},
    };
    return keys;
}

// Merged settings: file, then environment, then flags.
class Settings {
public:
    void load_file(const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
        std::vector<CLI::ConfigItem> items;
        try {
            items = CLI::ConfigTOML().from_config(in);
        } catch (const CLI::Error& e) {
            throw ConfigError("bad config file '" + path.string() + "': " + e.what());
        }
        std::vector<std::string> unknown;
        for (const auto& item : items) {
            if (item.name == "++" || item.name == "--") continue;  // section markers
            const std::string key = item.fullname();
            if (!known_keys().count(key)) {
                unknown.push_back("unknown config key '" + key + "'");
                continue;
            }
            std::string value;
            for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
            values_[key] = value;
        }
        if (!unknown.empty()) throw ValidationError(std::move(unknown));
    }

    void load_env() {
        for (const auto& [var, key] : env_keys())
            if (const char* v = std::getenv(var.c_str()); v && *v) values_[key] = v;
    }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key) const {
        if (auto it = values_.find(key); it != values_.end()) return it->second;
        return known_keys().at(key);
    }

    double real(const std::string& key) const {
        const std::string v = str(key);
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("'" + key + "' must be a number, got '" + v + "'");
        }
    }

    std::size_t count(const std::string& key) const {
        const std::string v = str(key);
        try {
            std::size_t used = 0;
            const long long n = std::stoll(v, &used);
            if (used != v.size() || n < 0) throw std::invalid_argument(v);
            return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
            throw ConfigError("'" + key + "' must be a non-negative integer, got '" + v + "'");
        }
    }

    bool flag(const std::string& key) const {
        const std::string v = ident_key(str(key));
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("'" + key + "' must be true or false, got '" + v + "'");
    }

private:
    std::map<std::string, std::string> values_;
};

// Binds a string flag whose value lands in `key` only when given.
struct Bound {
    CLI::Option* option;
    std::string* value;
    std::string key;
};

struct Command {
    std::string config;
    std::vector<Bound> bound;
    std::optional<bool> rollup;
    std::optional<bool> drilldown;

    CLI::Option* bind(CLI::App& app, const std::string& name, const std::string& key, const std::string& help) {
        auto value = std::make_shared<std::string>(known_keys().at(key));
        storage.push_back(value);
        auto* opt = app.add_option(name, *value, help)->default_str(known_keys().at(key));
        bound.push_back({opt, value.get(), key});
        return opt;
    }

    Settings settings() const {
        Settings s;
        if (!config.empty()) s.load_file(config);
        s.load_env();
        for (const auto& b : bound)
            if (b.option->count() > 0) s.set(b.key, *b.value);
        if (rollup) s.set("pipeline.rollup", *rollup ? "true" : "false");
        if (drilldown) s.set("pipeline.drilldown", *drilldown ? "true" : "false");
        return s;
    }

    std::vector<std::shared_ptr<std::string>> storage;
};

void add_config_option(CLI::App& app, Command& cmd) {
    app.add_option("--config", cmd.config, "Key/value config file ([flood], [cupid], [llm], [embed], [pipeline])")
        ->default_str("none");
}

void add_llm_options(CLI::App& app, Command& cmd) {
    cmd.bind(app, "--client", "llm.client",
             "remote | mock:TRANSCRIPT | oracle[:GOLDFILE] (oracle is an evaluation device that answers from gold)");
    cmd.bind(app, "--retries", "llm.retries", "Parser retries per prompt");
    cmd.bind(app, "--concurrency", "llm.max_concurrency", "Source tables processed concurrently");
}

void add_pipeline_options(CLI::App& app, Command& cmd) {
    cmd.bind(app, "--preset", "pipeline.preset", "llmatch | rematch");
    cmd.bind(app, "--strategy", "pipeline.strategy", "Table selection: none | nested | vector | llm");
    cmd.bind(app, "--k", "pipeline.k", "Tables kept by vector selection");
    cmd.bind(app, "--elements", "pipeline.elements", "Comma list of name, desc, keys, types");
    cmd.bind(app, "--budget", "pipeline.budget", "Max words per prompt (0 = unlimited)");
    cmd.bind(app, "--overhead", "pipeline.overhead", "Words reserved per prompt for instructions");
    app.add_flag_function(
           "--rollup,!--no-rollup", [&cmd](std::int64_t n) { cmd.rollup = n > 0; }, "Roll up related columns")
        ->default_str(known_keys().at("pipeline.rollup"));
    app.add_flag_function(
           "--drilldown,!--no-drilldown", [&cmd](std::int64_t n) { cmd.drilldown = n > 0; },
           "Refine alias matches to member columns (needs rollup)")
        ->default_str(known_keys().at("pipeline.drilldown"));
}

PipelineConfig pipeline_config(const Settings& s) {
    PipelineConfig cfg = PipelineConfig::from_preset(parse_preset(s.str("pipeline.preset")));
    const std::size_t k = s.count("pipeline.k");
    if (s.has("pipeline.strategy"))
        cfg.strategy = SelectionStrategy::parse(s.str("pipeline.strategy"), k);
    else
        cfg.strategy.k = k;
    cfg.elements = ElementConfig::parse(s.str("pipeline.elements"));
    if (s.has("pipeline.rollup")) cfg.rollup_enabled = s.flag("pipeline.rollup");
    if (s.has("pipeline.drilldown"))
        cfg.drilldown_enabled = s.flag("pipeline.drilldown");
    else
        cfg.drilldown_enabled = cfg.drilldown_enabled && cfg.rollup_enabled;
    if (const std::size_t words = s.count("pipeline.budget"); words > 0)
        cfg.budget = BudgetConfig{words, s.count("pipeline.overhead")};
    cfg.max_concurrency = s.count("llm.max_concurrency");
    cfg.validate();
    return cfg;
}

FloodConfig flood_config(const Settings& s) {
    FloodConfig cfg{s.real("flood.epsilon"), s.count("flood.max_iters"), s.real("flood.threshold")};
    cfg.validate();
    return cfg;
}

CupidConfig cupid_config(const Settings& s) {
    CupidConfig cfg{s.real("cupid.w_struct"), s.real("cupid.threshold")};
    cfg.validate();
    return cfg;
}

int retries_of(const Settings& s) {
    const std::size_t r = s.count("llm.retries");
    if (r > 10) throw ConfigError("llm.retries must be <= 10");
    return static_cast<int>(r);
}

// Client factory; `oracle` without a file answers from each dataset's gold.
ClientFactory client_factory(const Settings& s) {
    const std::string spec = s.str("llm.client");
    if (spec == "remote") {
        RemoteClientOptions opts;
        opts.endpoint = s.str("llm.endpoint");
        opts.model = s.str("llm.model");
        opts.api_key = s.str("llm.api_key");
        if (!s.str("llm.temperature").empty()) opts.temperature = s.real("llm.temperature");
        opts.max_concurrency = s.count("llm.max_concurrency");
        RemoteClient probe(opts);  // validates endpoint and model up front
        return [opts](const Dataset&) { return std::make_unique<RemoteClient>(opts); };
    }
    if (spec.rfind("mock:", 0) == 0) {
        const fs::path file = spec.substr(5);
        const Json doc = read_json_file(file);
        ScriptedClient::from_json(doc);  // fail fast on a bad transcript
        return [doc](const Dataset&) { return std::make_unique<ScriptedClient>(ScriptedClient::from_json(doc)); };
    }
    if (spec == "oracle") return [](const Dataset& d) { return std::make_unique<OracleClient>(d.gold); };
    if (spec.rfind("oracle:", 0) == 0) {
        const fs::path file = spec.substr(7);
        return [file](const Dataset& d) {
            return std::make_unique<OracleClient>(load_ground_truth_file(file, d.source, d.target));
        };
    }
    throw ConfigError("unknown client '" + spec + "' (expected remote, mock:FILE, oracle:GOLDFILE)");
}

std::unique_ptr<EmbeddingProvider> embedding_provider(const Settings& s) {
    const std::string kind = ident_key(s.str("embed.provider"));
    const std::size_t dim = s.count("embed.dim");
    if (kind == "local") return std::make_unique<LocalEmbedder>(dim);
    if (kind != "remote") throw ConfigError("embed.provider must be local or remote");
    RemoteEmbedderOptions opts;
    opts.endpoint = s.str("embed.endpoint");
    opts.dim = dim;
    opts.api_key = s.str("embed.api_key");
    opts.max_concurrency = s.count("embed.max_concurrency");
    std::shared_ptr<EmbeddingProvider> fallback;
    const std::string fb = ident_key(s.str("embed.fallback"));
    if (fb == "local")
        fallback = std::make_shared<LocalEmbedder>(dim);
    else if (fb != "none")
        throw ConfigError("embed.fallback must be none or local");
    auto cached = std::make_unique<CachedEmbedder>(std::make_shared<RemoteEmbedder>(opts), fallback);
    cached->load(s.str("embed.cache"));
    return cached;
}

void save_cache(EmbeddingProvider& provider, const Settings& s) {
    if (auto* cached = dynamic_cast<CachedEmbedder*>(&provider)) cached->save(s.str("embed.cache"));
}

std::string stem_name(const fs::path& p) {
    std::string name = p.filename().string();
    if (auto dot = name.find('.'); dot != std::string::npos) name.resize(dot);
    return name;
}

void write_doc(const fs::path& path, const Json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

// --- Subcommands -----------------------------------------------------------

struct MatchArgs {
    Command cmd;
    std::string source, target, gold, out = "match";
};

int run_match(MatchArgs& a, std::ostream& out) {
    const Settings s = a.cmd.settings();
    const PipelineConfig cfg = pipeline_config(s);
    Dataset data;
    data.name = stem_name(a.source);
    data.source = load_schema_file(a.source);
    data.target = load_schema_file(a.target);
    if (!a.gold.empty()) data.gold = load_ground_truth_file(a.gold, data.source, data.target);
    auto client = client_factory(s)(data);
    auto provider = embedding_provider(s);

    Gateway gateway(*client, retries_of(s));
    const PipelineResult result = run_pipeline(data.source, data.target, cfg, gateway, *provider);
    save_cache(*provider, s);

    const fs::path mapping_path = a.out + ".mapping.json";
    const fs::path report_path = a.out + ".report.json";
    write_doc(mapping_path, matchset_to_json(result.matches));
    Json report = result.report.to_json();
    Json summary{{"pairs", result.matches.size()},
                 {"mapping", mapping_path.string()},
                 {"report", report_path.string()},
                 {"prompts", result.report.gateway.prompts},
                 {"warnings", result.report.warnings.size()}};
    if (!a.gold.empty()) {
        const EvalReport eval = evaluate_f1(result.matches, data.gold, data.source, data.target);
        report["evaluation"] = eval.to_json();
        summary["f1"] = eval.f1;
    }
    write_doc(report_path, report);
    out << summary.dump() << "\n";
    return 0;
}

struct EvalArgs {
    Command cmd;
    std::string pred, gold, source, target, out;
};

int run_eval(EvalArgs& a, std::ostream& out) {
    a.cmd.settings();
    const Schema source = load_schema_file(a.source);
    const Schema target = load_schema_file(a.target);
    const MatchSet pred = load_ground_truth_file(a.pred, source, target);
    const MatchSet gold = load_ground_truth_file(a.gold, source, target);
    const Json report = evaluate_f1(pred, gold, source, target).to_json();
    if (!a.out.empty()) write_doc(a.out, report);
    out << report.dump() << "\n";
    return 0;
}

struct StatsArgs {
    Command cmd;
    std::string grid, source, target, gold, name, out = "stats.csv";
};

int run_stats(StatsArgs& a, std::ostream& out) {
    a.cmd.settings();
    std::vector<DatasetSpec> specs;
    if (!a.grid.empty()) {
        specs = ExperimentGrid::from_file(a.grid).datasets;
    } else {
        if (a.source.empty() || a.target.empty() || a.gold.empty())
            throw ConfigError("stats needs --grid or all of --source, --target, --gold");
        specs.push_back({a.name.empty() ? stem_name(a.source) : a.name, a.source, a.target, a.gold});
    }
    std::vector<StatsRow> rows;
    for (const auto& spec : specs) rows.push_back(dataset_stats(load_dataset(spec)));
    const std::string csv = stats_csv(rows);
    write_text_file(a.out, csv);
    out << csv;
    return 0;
}

struct BenchArgs {
    Command cmd;
    std::string grid, mode = "both", out = ".";
};

int run_bench(BenchArgs& a, std::ostream& out) {
    const Settings s = a.cmd.settings();
    const std::string mode = ident_key(a.mode);
    if (mode != "ablation" && mode != "scalability" && mode != "both")
        throw ConfigError("--mode must be ablation, scalability or both");
    ExperimentGrid grid = ExperimentGrid::from_file(a.grid);
    // Flags and config override the grid's pipeline switches.
    if (s.has("pipeline.rollup")) grid.base.rollup_enabled = s.flag("pipeline.rollup");
    if (s.has("pipeline.drilldown")) grid.base.drilldown_enabled = s.flag("pipeline.drilldown");
    grid.base.max_concurrency = s.count("llm.max_concurrency");
    grid.base.validate();
    const ClientFactory clients = client_factory(s);
    auto provider = embedding_provider(s);
    const int retries = retries_of(s);
    fs::create_directories(a.out);

    Json summary = Json::object();
    if (mode != "scalability") {
        const auto rows = run_ablation(grid, clients, *provider, retries);
        write_text_file(fs::path(a.out) / "ablation.csv", ablation_csv(rows));
        summary["ablation_rows"] = rows.size();
    }
    if (mode != "ablation") {
        std::vector<ScalabilityRow> rows;
        PipelineConfig cfg = grid.base;
        cfg.elements = grid.element_configs.back();
        cfg.strategy = grid.strategies.front();
        for (const auto& spec : grid.datasets) {
            const Dataset data = load_dataset(spec);
            auto part = run_scalability(grid.budgets, data, cfg, clients, *provider, retries);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        write_text_file(fs::path(a.out) / "scalability.csv", scalability_csv(rows));
        summary["scalability_rows"] = rows.size();
    }
    save_cache(*provider, s);
    out << summary.dump() << "\n";
    return 0;
}

struct BaselineArgs {
    Command cmd;
    std::string source, target, gold, matcher = "composite", members = "lexical,flood,cupid", out = "baseline.mapping.json";
    double threshold = 0.5;
};

int run_baseline(BaselineArgs& a, CLI::Option* threshold_opt, std::ostream& out) {
    const Settings s = a.cmd.settings();
    const Schema source = load_schema_file(a.source);
    const Schema target = load_schema_file(a.target);
    const std::string matcher = ident_key(a.matcher);
    const bool threshold_given = threshold_opt->count() > 0;

    MatchSet matches;
    if (matcher == "composite") {
        std::vector<std::string> members;
        std::string cur;
        for (char c : a.members + ",") {
            if (c != ',') {
                cur += c;
            } else if (!trim(cur).empty()) {
                members.push_back(trim(cur));
                cur.clear();
            }
        }
        matches = composite_match(source, target, members, a.threshold, {flood_config(s), cupid_config(s)});
    } else {
        switch (parse_matcher_id(matcher)) {
            case MatcherId::lexical:
                matches = lexical_match(source, target, a.threshold);
                break;
            case MatcherId::flood: {
                FloodConfig cfg = flood_config(s);
                if (threshold_given) cfg.select_threshold = a.threshold;
                cfg.validate();
                matches = similarity_flood_match(source, target, cfg);
                break;
            }
            case MatcherId::cupid: {
                CupidConfig cfg = cupid_config(s);
                if (threshold_given) cfg.select_threshold = a.threshold;
                cfg.validate();
                matches = cupid_match(source, target, cfg);
                break;
            }
        }
    }
    write_doc(a.out, matchset_to_json(matches));
    Json summary{{"matcher", matcher}, {"pairs", matches.size()}, {"mapping", a.out}};
    if (!a.gold.empty()) {
        const MatchSet gold = load_ground_truth_file(a.gold, source, target);
        summary["f1"] = evaluate_f1(matches, gold, source, target).f1;
    }
    out << summary.dump() << "\n";
    return 0;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const BudgetTooSmall*>(&e) ||
        dynamic_cast<const ResolutionError*>(&e))
        return 1;
    return 2;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const std::vector<std::string>& details = {}) {
    Json doc{{"error", {{"kind", kind}, {"message", message}}}};
    if (!details.empty()) doc["error"]["violations"] = details;
    err << doc.dump() << "\n";
}

}  // namespace

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Schema matching with rollup, table selection, column matching and drilldown", "schemamatch"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    MatchArgs match;
    auto* match_cmd = app.add_subcommand("match", "Run the matching pipeline; writes OUT.mapping.json and OUT.report.json");
    match_cmd->add_option("--source", match.source, "Source schema file")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--target", match.target, "Target schema file")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--gold", match.gold, "Ground truth; adds an evaluation to the report")
        ->check(CLI::ExistingFile)
        ->default_str("none");
    match_cmd->add_option("--out", match.out, "Output path prefix")->capture_default_str();
    add_pipeline_options(*match_cmd, match.cmd);
    add_llm_options(*match_cmd, match.cmd);
    add_config_option(*match_cmd, match.cmd);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a predicted mapping against ground truth");
    eval_cmd->add_option("--pred", eval.pred, "Predicted mapping file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--gold", eval.gold, "Ground-truth mapping file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--source", eval.source, "Source schema file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--target", eval.target, "Target schema file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval.out, "Also write the report here")->default_str("none");
    add_config_option(*eval_cmd, eval.cmd);

    StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "Schema and mapping statistics as CSV");
    stats_cmd->add_option("--grid", stats.grid, "Grid file listing datasets")->check(CLI::ExistingFile)->default_str("none");
    stats_cmd->add_option("--source", stats.source, "Source schema file")->check(CLI::ExistingFile)->default_str("none");
    stats_cmd->add_option("--target", stats.target, "Target schema file")->check(CLI::ExistingFile)->default_str("none");
    stats_cmd->add_option("--gold", stats.gold, "Ground-truth mapping file")->check(CLI::ExistingFile)->default_str("none");
    stats_cmd->add_option("--name", stats.name, "Dataset name")->default_str("source file stem");
    stats_cmd->add_option("--out", stats.out, "CSV output path")->capture_default_str();
    add_config_option(*stats_cmd, stats.cmd);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Ablation and budget sweeps from a grid file");
    bench_cmd->add_option("--grid", bench.grid, "Grid file")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--mode", bench.mode, "ablation | scalability | both")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "Directory for ablation.csv and scalability.csv")->capture_default_str();
    add_llm_options(*bench_cmd, bench.cmd);
    bench_cmd->add_flag_function(
                  "--rollup,!--no-rollup", [&bench](std::int64_t n) { bench.cmd.rollup = n > 0; },
                  "Override the grid's rollup switch")
        ->default_str("grid");
    bench_cmd->add_flag_function(
                  "--drilldown,!--no-drilldown", [&bench](std::int64_t n) { bench.cmd.drilldown = n > 0; },
                  "Override the grid's drilldown switch")
        ->default_str("grid");
    add_config_option(*bench_cmd, bench.cmd);

    BaselineArgs base;
    auto* base_cmd = app.add_subcommand("baseline", "Run a classical matcher");
    base_cmd->add_option("--source", base.source, "Source schema file")->required()->check(CLI::ExistingFile);
    base_cmd->add_option("--target", base.target, "Target schema file")->required()->check(CLI::ExistingFile);
    base_cmd->add_option("--matcher", base.matcher, "lexical | flood | cupid | composite")->capture_default_str();
    base_cmd->add_option("--members", base.members, "Composite members")->capture_default_str();
    auto* threshold_opt =
        base_cmd->add_option("--threshold", base.threshold, "Selection threshold (flood and cupid default to config)")
            ->capture_default_str();
    base_cmd->add_option("--gold", base.gold, "Ground truth; prints f1")->check(CLI::ExistingFile)->default_str("none");
    base_cmd->add_option("--out", base.out, "Mapping output path")->capture_default_str();
    add_config_option(*base_cmd, base.cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        report_error(err, "UsageError", e.what());
        return 1;
    }

    try {
        if (*match_cmd) return run_match(match, out);
        if (*eval_cmd) return run_eval(eval, out);
        if (*stats_cmd) return run_stats(stats, out);
        if (*bench_cmd) return run_bench(bench, out);
        if (*base_cmd) return run_baseline(base, threshold_opt, out);
    } catch (const ValidationError& e) {
        report_error(err, e.kind(), e.what(), e.violations());
        return 1;
    } catch (const Error& e) {
        report_error(err, e.kind(), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        report_error(err, "RuntimeError", e.what());
        return 2;
    }
    return 1;
}

int execute(const std::vector<std::string>& args) { return execute(args, std::cout, std::cerr); }

}  // namespace schemamatch::cli
