#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "fuzz_client.hpp"
#include "schemamatch/errors.hpp"
#include "schemamatch/eval.hpp"
#include "schemamatch/pipeline.hpp"
#include "schemamatch/text.hpp"
#include "support.hpp"

using namespace schemamatch;

namespace {

Schema six_columns() {
    return load_schema(Json{{"name", "s"},
                            {"tables",
                             {{{"name", "t"},
                               {"columns",
                                {{{"name", "id"}, {"primary_key", true}},
                                 {{"name", "street"}},
                                 {{"name", "first_name"}},
                                 {{"name", "city"}},
                                 {{"name", "last_name"}},
                                 {{"name", "zip"}}}}},
                              {{"name", "u"},
                               {"columns", {{{"name", "uid"}, {"primary_key", true}}, {{"name", "t_city"}}}},
                               {"foreign_keys", Json::array()}}}}});
}

RollupRegistry registry_of(std::initializer_list<RollupGroup> groups) {
    RollupRegistry r;
    for (auto g : groups) r.add(std::move(g));
    return r;
}

std::vector<std::string> names(const Table& t) {
    std::vector<std::string> out;
    for (const auto& c : t.columns) out.push_back(c.name);
    return out;
}

std::set<std::string> key_set(const std::vector<std::string>& xs) {
    std::set<std::string> out;
    for (const auto& x : xs) out.insert(ident_key(x));
    return out;
}

PipelineConfig plain_config(SelectionStrategy s, bool rollup = false, bool drilldown = false) {
    PipelineConfig cfg;
    cfg.strategy = s;
    cfg.elements = ElementConfig::all();
    cfg.rollup_enabled = rollup;
    cfg.drilldown_enabled = drilldown;
    return cfg;
}

// Rolls up deposit_account's currency columns and otherwise answers from gold,
// mapping gold targets onto the alias when they are members.
class BankRollupClient final : public CompletionClient {
public:
    explicit BankRollupClient(MatchSet gold) : gold_(std::move(gold)), oracle_(gold_) {}
    std::string complete(const Prompt& p) override {
        if (p.kind == PromptKind::rollup && ident_equal(p.table, "deposit_account"))
            return R"({"groups":[{"alias":"currency_meta_data","columns":["currency","currency_code","currency_id"],"description":"Currency details"}]})";
        if (p.kind == PromptKind::column_match) {
            Json matches = Json::array();
            for (const auto& [_, c] : gold_) {
                if (!ident_equal(c.source.table, p.table)) continue;
                std::string col = c.target.column;
                if (ident_equal(c.target.table, "deposit_account") && col.rfind("currency", 0) == 0) col = "currency_meta_data";
                const bool offered = std::any_of(p.target_columns.begin(), p.target_columns.end(), [&](const ColumnRef& r) {
                    return ident_equal(r.table, c.target.table) && ident_equal(r.column, col);
                });
                if (offered) matches.push_back({{"source_column", c.source.column}, {"target_table", c.target.table}, {"target_column", col}});
            }
            return Json{{"matches", matches}}.dump();
        }
        return oracle_.complete(p);
    }
    bool deterministic() const override { return true; }

private:
    MatchSet gold_;
    OracleClient oracle_;
};

}  // namespace

// --- configuration ---------------------------------------------------------

TEST(Strategy, ParseAndLabel) {
    EXPECT_EQ(SelectionStrategy::parse("vector:3").k, 3u);
    EXPECT_EQ(SelectionStrategy::parse("vector", 7).label(), "vector:7");
    EXPECT_EQ(SelectionStrategy::parse("nested").kind, StrategyKind::nested_join);
    EXPECT_EQ(SelectionStrategy::parse("none").label(), "none");
    EXPECT_EQ(SelectionStrategy::parse("LLM").kind, StrategyKind::llm);
    EXPECT_THROW(SelectionStrategy::parse("vector:0"), ConfigError);
    EXPECT_THROW(SelectionStrategy::parse("vector:x"), ConfigError);
    EXPECT_THROW(SelectionStrategy::parse("magic"), ConfigError);
}

TEST(Config, DrilldownNeedsRollup) {
    PipelineConfig cfg = PipelineConfig::from_preset(Preset::llmatch);
    EXPECT_NO_THROW(cfg.validate());
    cfg.rollup_enabled = false;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.drilldown_enabled = false;
    EXPECT_NO_THROW(cfg.validate());
    cfg.max_concurrency = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, RematchPreset) {
    const PipelineConfig cfg = PipelineConfig::from_preset(Preset::rematch);
    EXPECT_EQ(cfg.strategy.kind, StrategyKind::vector_similarity);
    EXPECT_FALSE(cfg.rollup_enabled);
    EXPECT_FALSE(cfg.drilldown_enabled);
    EXPECT_NO_THROW(cfg.validate());
    PipelineConfig bad = cfg;
    bad.strategy = SelectionStrategy::parse("llm");
    EXPECT_THROW(bad.validate(), ConfigError);
    EXPECT_THROW(parse_preset("turbo"), ConfigError);
}

// --- rollup views ------------------------------------------------------------

TEST(RollupView, TwoDisjointGroups) {
    const Schema s = six_columns();
    const RolledSchema r = build_rolled_schema(
        s, registry_of({{"t", "address", {"street", "city", "zip"}, "postal address"}, {"t", "person_name", {"first_name", "last_name"}, ""}}));
    EXPECT_EQ(names(r.view.tables[0]), (std::vector<std::string>{"id", "address", "person_name"}));
    EXPECT_EQ(r.view.tables[0].columns[1].description, "postal address");
    EXPECT_FALSE(r.view.tables[0].columns[1].is_primary_key);
    EXPECT_EQ(r.base, s);
    EXPECT_EQ(r.view.tables[1], s.tables[1]);
}

TEST(RollupView, ForeignKeysOnMembersAreDropped) {
    const auto bank = support::bank();
    const RolledSchema r = build_rolled_schema(
        bank.target, registry_of({{"deposit_account", "acct_meta", {"acct_no", "client_no"}, ""}}));
    const Table& dep = *r.view.find_table("deposit_account");
    EXPECT_EQ(names(dep).front(), "acct_meta");
    EXPECT_TRUE(dep.foreign_keys.empty());
    EXPECT_TRUE(r.view.find_table("payment")->foreign_keys.empty());  // pointed at acct_no
}

TEST(RollupView, RejectsBadGroups) {
    const Schema s = six_columns();
    EXPECT_THROW(build_rolled_schema(s, registry_of({{"t", "a", {"street", "nope"}, ""}})), ValidationError);
    EXPECT_THROW(build_rolled_schema(s, registry_of({{"t", "city", {"street", "zip"}, ""}})), ValidationError);
    EXPECT_THROW(build_rolled_schema(s, registry_of({{"t", "a", {"street", "zip"}, ""}, {"t", "b", {"zip", "city"}, ""}})),
                 ValidationError);
    EXPECT_THROW(build_rolled_schema(s, registry_of({{"ghost", "a", {"x", "y"}, ""}})), ValidationError);
}

TEST(RollupView, ApplyRollupThroughGateway) {
    const Schema s = six_columns();
    FunctionClient client([](const Prompt& p) -> std::string {
        if (p.table == "t")
            return R"({"groups":[{"alias":"address","columns":["street","city","zip"]},{"alias":"person_name","columns":["first_name","last_name"]}]})";
        return R"({"groups":[]})";
    });
    Gateway gw(client);
    Warnings w;
    const RolledSchema r = apply_rollup(s, gw, ElementConfig::all(), w);
    EXPECT_EQ(r.registry.size(), 2u);
    EXPECT_EQ(names(r.view.tables[0]), (std::vector<std::string>{"id", "address", "person_name"}));
    EXPECT_EQ(gw.counters().prompts, 2u);
}

// --- budgets -------------------------------------------------------------------

TEST(Batches, GreedyExample) {
    const std::vector<BatchItem> items{{"a", 40}, {"b", 40}, {"c", 40}};
    const auto b = split_batches(items, BudgetConfig{100, 0}, 10);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(b[1], (std::vector<std::size_t>{2}));
    EXPECT_EQ(split_batches(items, std::nullopt, 1000).size(), 1u);
    EXPECT_TRUE(split_batches({}, BudgetConfig{100, 0}, 10).empty());
}

TEST(Batches, ItemThatCannotFitIsNamed) {
    const std::vector<BatchItem> items{{"a", 10}, {"huge", 95}};
    try {
        split_batches(items, BudgetConfig{100, 5}, 10);
        FAIL();
    } catch (const BudgetTooSmall& e) {
        EXPECT_EQ(e.item(), "huge");
        EXPECT_EQ(e.required(), 110u);
        EXPECT_EQ(e.available(), 100u);
    }
}

TEST(Batches, RandomPackingsAreValidAndGreedy) {
    support::Gen g(41);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<BatchItem> items;
        for (int i = 0; i < g.uniform(1, 15); ++i) items.push_back({"t" + std::to_string(i), std::size_t(g.uniform(1, 60))});
        const std::size_t fixed = g.uniform(0, 30);
        const std::size_t overhead = g.uniform(0, 10);
        const std::size_t biggest = std::max_element(items.begin(), items.end(), [](auto& a, auto& b) { return a.words < b.words; })->words;
        const std::size_t limit = fixed + overhead + biggest + g.uniform(0, 100);
        const auto batches = split_batches(items, BudgetConfig{limit, overhead}, fixed);
        std::vector<std::size_t> flat;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            std::size_t used = fixed + overhead;
            for (auto i : batches[b]) used += items[i].words;
            EXPECT_LE(used, limit);
            ASSERT_FALSE(batches[b].empty());
            if (b + 1 < batches.size()) EXPECT_GT(used + items[batches[b + 1][0]].words, limit);
            flat.insert(flat.end(), batches[b].begin(), batches[b].end());
        }
        std::vector<std::size_t> expect(items.size());
        std::iota(expect.begin(), expect.end(), 0);
        EXPECT_EQ(flat, expect);
    }
}

TEST(Budget, LargestPairMustFit) {
    const auto bank = support::bank();
    const ElementConfig cfg = ElementConfig::all();
    std::size_t src = 0, tgt = 0;
    for (const auto& t : bank.source.tables) src = std::max(src, word_count(serialize_table(t, cfg)));
    for (const auto& t : bank.target.tables) tgt = std::max(tgt, word_count(serialize_table(t, cfg)));
    EXPECT_NO_THROW(check_budget(bank.source, bank.target, cfg, BudgetConfig{src + tgt + 5, 5}));
    try {
        check_budget(bank.source, bank.target, cfg, BudgetConfig{src + tgt + 4, 5});
        FAIL();
    } catch (const BudgetTooSmall& e) {
        EXPECT_EQ(e.required(), src + tgt + 5);
        EXPECT_NE(e.item().find("accounts"), std::string::npos);
    }
    EXPECT_NO_THROW(check_budget(bank.source, bank.target, cfg, std::nullopt));
}

// --- selection and matching ------------------------------------------------

TEST(Selection, StrategiesOnBank) {
    const auto bank = support::bank();
    const RolledSchema target = build_rolled_schema(bank.target, {});
    OracleClient oracle(bank.gold);
    Gateway gw(oracle);
    LocalEmbedder emb;
    Warnings w;
    const Table& acc = *bank.source.find_table("accounts");
    const auto cfg = ElementConfig::all();

    const auto none = select_tables(SelectionStrategy::parse("none"), acc, target, gw, emb, cfg, std::nullopt, w);
    EXPECT_EQ(none.candidates.size(), 4u);
    EXPECT_EQ(gw.counters().prompts, 0u);
    const auto vec = select_tables(SelectionStrategy::parse("vector:2"), acc, target, gw, emb, cfg, std::nullopt, w);
    EXPECT_EQ(vec.candidates.size(), 2u);
    const auto llm = select_tables(SelectionStrategy::parse("llm"), acc, target, gw, emb, cfg, std::nullopt, w);
    EXPECT_EQ(key_set(llm.candidates), (std::set<std::string>{"branch", "deposit_account"}));
    EXPECT_EQ(gw.counters().prompts, 1u);
}

TEST(Selection, NestedJoinPromptsPerCandidate) {
    const auto bank = support::bank();
    const RolledSchema target = build_rolled_schema(bank.target, {});
    OracleClient oracle(bank.gold);
    Gateway gw(oracle);
    LocalEmbedder emb;
    Warnings w;
    StageCounters sc;
    const Table& acc = *bank.source.find_table("accounts");
    const auto cand = select_tables(SelectionStrategy::parse("nested"), acc, target, gw, emb, ElementConfig::all(), std::nullopt, w);
    const auto pairs = match_columns(acc, cand, target, gw, ElementConfig::all(), std::nullopt, w, &sc);
    EXPECT_EQ(gw.counters().prompts, 4u);
    EXPECT_EQ(sc.batches, 4u);
    EXPECT_EQ(pairs.size(), 3u);
}

TEST(Selection, BatchedEqualsUnbatchedUnion) {
    for (const auto& pair : {support::bank(), support::clinic()}) {
        const RolledSchema target = build_rolled_schema(pair.target, {});
        LocalEmbedder emb;
        const auto cfg = ElementConfig::all();
        std::size_t src = 0, tgt = 0;
        for (const auto& t : pair.source.tables) src = std::max(src, word_count(serialize_table(t, cfg)));
        for (const auto& t : pair.target.tables) tgt = std::max(tgt, word_count(serialize_table(t, cfg)));
        for (const auto& source : pair.source.tables) {
            OracleClient a(pair.gold), b(pair.gold);
            Gateway ga(a), gb(b);
            Warnings w;
            StageCounters tight_counts;
            const Budget tight = BudgetConfig{src + tgt, 0};
            const auto one = select_tables(SelectionStrategy{}, source, target, ga, emb, cfg, std::nullopt, w);
            const auto many = select_tables(SelectionStrategy{}, source, target, gb, emb, cfg, tight, w, &tight_counts);
            EXPECT_GT(tight_counts.batches, 1u);
            EXPECT_EQ(key_set(one.candidates), key_set(many.candidates));

            CandidateSet all{source.name, {}, SelectionStrategy::parse("none")};
            for (const auto& t : pair.target.tables) all.candidates.push_back(t.name);
            MatchSet x, y;
            for (auto& c : match_columns(source, all, target, ga, cfg, std::nullopt, w)) x.insert(c);
            for (auto& c : match_columns(source, all, target, gb, cfg, tight, w)) y.insert(c);
            EXPECT_TRUE(x.same_pairs(y));
        }
    }
}

// --- drilldown ---------------------------------------------------------------

TEST(Drilldown, ReplacesAliasPairsAndKeepsPlainOnes) {
    const auto bank = support::bank();
    const RolledSchema src = build_rolled_schema(bank.source, {});
    const RolledSchema tgt = build_rolled_schema(
        bank.target, registry_of({{"deposit_account", "currency_meta_data", {"currency", "currency_code", "currency_id"}, ""}}));
    const std::vector<Correspondence> coarse{
        {{"accounts", "bal_currency"}, {"deposit_account", "currency_meta_data"}, Stage::llm_match, {}},
        {{"accounts", "branch_name"}, {"branch", "branch_name"}, Stage::llm_match, {}}};

    OracleClient oracle(bank.gold);
    Gateway gw(oracle);
    Warnings w;
    std::vector<DrilldownRecord> log;
    const MatchSet refined = apply_drilldown(coarse, src, tgt, gw, ElementConfig::all(), w, &log);
    EXPECT_EQ(refined.size(), 3u);
    EXPECT_TRUE(refined.contains({"accounts", "bal_currency"}, {"deposit_account", "currency"}));
    EXPECT_TRUE(refined.contains({"accounts", "bal_currency"}, {"deposit_account", "currency_code"}));
    EXPECT_TRUE(refined.contains({"accounts", "branch_name"}, {"branch", "branch_name"}));
    ASSERT_EQ(log.size(), 1u);
    EXPECT_EQ(gw.counters().prompts, 1u);

    const MatchSet expanded = expand_aliases(coarse, src, tgt);
    EXPECT_EQ(expanded.size(), 4u);
    EXPECT_TRUE(expanded.contains({"accounts", "bal_currency"}, {"deposit_account", "currency_id"}));
}

TEST(Drilldown, EmptyAnswerDropsPair) {
    const auto bank = support::bank();
    const RolledSchema src = build_rolled_schema(bank.source, {});
    const RolledSchema tgt = build_rolled_schema(
        bank.target, registry_of({{"deposit_account", "m", {"currency", "currency_code"}, ""}}));
    const std::vector<Correspondence> coarse{{{"accounts", "balance_amount"}, {"deposit_account", "m"}, Stage::llm_match, {}}};
    OracleClient oracle(bank.gold);
    Gateway gw(oracle);
    Warnings w;
    EXPECT_TRUE(apply_drilldown(coarse, src, tgt, gw, ElementConfig::all(), w).empty());
}

// --- end to end ---------------------------------------------------------------

TEST(Pipeline, TranscriptDemoReachesGold) {
    const auto bank = support::bank();
    ScriptedClient client = ScriptedClient::from_file(support::data_file("toy_bank.transcript.json"));
    Gateway gw(client);
    LocalEmbedder emb;
    const auto res = run_pipeline(bank.source, bank.target, PipelineConfig::from_preset(Preset::llmatch), gw, emb);
    EXPECT_EQ(evaluate_f1(res.matches, bank.gold, bank.source, bank.target).f1, 1.0);
    EXPECT_EQ(res.report.target_aliases, 1u);
    EXPECT_EQ(res.report.gateway.prompts, 14u);
    EXPECT_EQ(res.drilldowns.size(), 1u);
}

TEST(Pipeline, RollupWithAndWithoutDrilldown) {
    const auto bank = support::bank();
    LocalEmbedder emb;
    PipelineConfig cfg = plain_config(SelectionStrategy{}, true, true);
    BankRollupClient a(bank.gold);
    Gateway ga(a);
    const auto with = run_pipeline(bank.source, bank.target, cfg, ga, emb);
    EXPECT_TRUE(with.matches.same_pairs(bank.gold));

    cfg.drilldown_enabled = false;
    BankRollupClient b(bank.gold);
    Gateway gb(b);
    const auto without = run_pipeline(bank.source, bank.target, cfg, gb, emb);
    EXPECT_TRUE(without.matches.contains({"accounts", "bal_currency"}, {"deposit_account", "currency_id"}));
    EXPECT_EQ(without.matches.size(), bank.gold.size() + 1);
}

TEST(Pipeline, AliasHygieneAndCandidateSoundnessUnderFuzz) {
    const auto bank = support::bank();
    const auto clinic = support::clinic();
    LocalEmbedder emb;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto& pair = seed % 2 ? bank : clinic;
        for (const char* strat : {"llm", "vector:2", "nested"}) {
            support::FuzzClient client(seed);
            Gateway gw(client, 1);
            PipelineConfig cfg = plain_config(SelectionStrategy::parse(strat), true, seed % 3 != 0);
            const auto res = run_pipeline(pair.source, pair.target, cfg, gw, emb);
            std::map<std::string, std::set<std::string>> cands;
            for (const auto& t : res.report.tables) cands[ident_key(t.source_table)] = key_set(t.candidates);
            for (const auto& [_, c] : res.matches) {
                EXPECT_TRUE(resolve(pair.source, c.source.table, c.source.column)) << c.source.display();
                EXPECT_TRUE(resolve(pair.target, c.target.table, c.target.column)) << c.target.display();
                EXPECT_TRUE(cands[ident_key(c.source.table)].count(ident_key(c.target.table)));
            }
        }
    }
}

TEST(Pipeline, DeterministicReports) {
    const auto bank = support::bank();
    LocalEmbedder emb;
    auto run = [&] {
        ScriptedClient client = ScriptedClient::from_file(support::data_file("toy_bank.transcript.json"));
        Gateway gw(client);
        const auto res = run_pipeline(bank.source, bank.target, PipelineConfig::from_preset(Preset::llmatch), gw, emb);
        return std::make_pair(matchset_to_json(res.matches).dump(), res.report.to_json(false).dump());
    };
    EXPECT_EQ(run(), run());
}

TEST(Pipeline, ConcurrencyDoesNotChangeResults) {
    const auto clinic = support::clinic();
    LocalEmbedder emb;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        // Answers depend only on the prompt, so the order of calls does not matter.
        FunctionClient fn([](const Prompt& p) {
            support::FuzzClient f(std::hash<std::string>{}(p.text));
            return f.complete(p);
        });
        PipelineConfig cfg = plain_config(SelectionStrategy{}, true, true);
        Gateway g1(fn, 1);
        const auto serial = run_pipeline(clinic.source, clinic.target, cfg, g1, emb);
        cfg.max_concurrency = 4;
        Gateway g4(fn, 1);
        const auto parallel = run_pipeline(clinic.source, clinic.target, cfg, g4, emb);
        EXPECT_TRUE(serial.matches.same_pairs(parallel.matches));
        Json a = serial.report.to_json(false), b = parallel.report.to_json(false);
        EXPECT_EQ(a, b);
    }
}

TEST(Pipeline, BudgetTooSmallSurfaces) {
    const auto bank = support::bank();
    OracleClient oracle(bank.gold);
    Gateway gw(oracle);
    LocalEmbedder emb;
    PipelineConfig cfg = plain_config(SelectionStrategy{});
    cfg.budget = BudgetConfig{30, 0};
    EXPECT_THROW(run_pipeline(bank.source, bank.target, cfg, gw, emb), BudgetTooSmall);
}
