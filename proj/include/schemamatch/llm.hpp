#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemamatch/schema.hpp"
#include "schemamatch/serializer.hpp"

namespace schemamatch {

enum class PromptKind { rollup, table_selection, column_match, drilldown };

const char* to_string(PromptKind kind);
std::optional<PromptKind> parse_prompt_kind(std::string_view text);

// Prompt text plus the structured facts it was built from. Remote clients
// only read `text`; scripted and oracle clients key on the rest.
struct Prompt {
    PromptKind kind = PromptKind::rollup;
    std::string text;
    std::string schema;                       // rollup: schema owning `table`
    std::string table;                        // rolled-up table, or the source table
    std::vector<std::string> candidates;      // target tables offered
    std::string column;                       // drilldown: source column of the coarse match
    std::vector<std::string> source_columns;  // columns an answer may name on the source side
    std::vector<ColumnRef> target_columns;    // columns an answer may name on the target side
    int attempt = 0;
};

class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::string complete(const Prompt& prompt) = 0;
    virtual bool deterministic() const = 0;
};

// --- Clients ---------------------------------------------------------------

struct RemoteClientOptions {
    std::string endpoint;
    std::string model;
    std::string api_key;
    std::optional<double> temperature;
    std::size_t max_concurrency = 4;
    int timeout_seconds = 120;
};

// OpenAI-style chat completion endpoint. Transport failures throw ClientError.
class RemoteClient final : public CompletionClient {
public:
    explicit RemoteClient(RemoteClientOptions options);
    std::string complete(const Prompt& prompt) override;
    bool deterministic() const override { return false; }

    // Request body sent for `text`; exposed for tests.
    std::string request_body(std::string_view text) const;

private:
    RemoteClientOptions options_;
    std::counting_semaphore<64> slots_;
};

// Transcript-driven mock. Records sharing the same key fields form a queue
// served in file order; the last response repeats once the queue drains.
// Unmatched prompts get an empty answer of the right shape.
class ScriptedClient final : public CompletionClient {
public:
    struct Record {
        PromptKind kind = PromptKind::rollup;
        std::string table;
        std::optional<std::string> schema;
        std::optional<std::vector<std::string>> candidates;  // compared as a set
        std::optional<std::string> column;
        std::string response;
    };

    ScriptedClient() = default;
    explicit ScriptedClient(std::vector<Record> records);
    ScriptedClient(ScriptedClient&& other) noexcept;
    // Accepts a list of records or {"records": [...]}; "response" may be a
    // string or an inline document.
    static ScriptedClient from_json(const Json& doc);
    static ScriptedClient from_file(const std::filesystem::path& path);

    void add(Record record);
    std::string complete(const Prompt& prompt) override;
    bool deterministic() const override { return true; }

    std::size_t served() const;
    std::size_t unmatched() const;

private:
    struct Queue {
        Record key;
        std::vector<std::string> responses;
        std::size_t next = 0;
    };
    static bool same_key(const Record& a, const Record& b);
    static bool matches(const Record& key, const Prompt& prompt);

    mutable std::mutex mu_;
    std::vector<Queue> queues_;
    std::size_t served_ = 0;
    std::size_t unmatched_ = 0;
};

// Answers from ground truth: never rolls up, selects exactly the gold-mapped
// candidate tables, and returns gold pairs restricted to what the prompt offers.
class OracleClient final : public CompletionClient {
public:
    explicit OracleClient(MatchSet gold);
    std::string complete(const Prompt& prompt) override;
    bool deterministic() const override { return true; }

private:
    MatchSet gold_;
};

class FunctionClient final : public CompletionClient {
public:
    using Fn = std::function<std::string(const Prompt&)>;
    explicit FunctionClient(Fn fn, bool deterministic = true) : fn_(std::move(fn)), deterministic_(deterministic) {}
    std::string complete(const Prompt& prompt) override { return fn_(prompt); }
    bool deterministic() const override { return deterministic_; }

private:
    Fn fn_;
    bool deterministic_;
};

// Empty answer of the right shape for `kind`.
std::string empty_response(PromptKind kind);

// --- Structured responses ------------------------------------------------

// Parses the first balanced top-level {...} region of `response`. Throws
// ParseError when there is none or it is not valid JSON.
Json extract_structured(std::string_view response);

// --- Rollup registry -------------------------------------------------------

struct RollupGroup {
    std::string table;
    std::string alias;
    std::vector<std::string> members;
    std::string alias_description;
};

class RollupRegistry {
public:
    // Throws ValidationError if (table, alias) is already registered.
    void add(RollupGroup group);
    const RollupGroup* find(std::string_view table, std::string_view alias) const;
    bool is_alias(std::string_view table, std::string_view column) const { return find(table, column) != nullptr; }
    std::vector<const RollupGroup*> groups_of(std::string_view table) const;
    std::size_t size() const noexcept { return groups_.size(); }
    bool empty() const noexcept { return groups_.empty(); }
    const std::vector<RollupGroup>& groups() const noexcept { return groups_; }

private:
    std::vector<RollupGroup> groups_;
    std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

// --- Gateway ---------------------------------------------------------------

// One side of a drilldown request: the base table and the columns the model
// may choose among (alias members, or the single matched column).
struct DrilldownSide {
    const Table* table = nullptr;
    std::optional<std::string> alias;
    std::vector<std::string> columns;
};

struct GatewayCounters {
    std::size_t prompts = 0;
    std::size_t words_sent = 0;
    std::size_t retries = 0;
    std::map<std::string, std::size_t> prompts_by_kind;
};

// Builds prompts, calls the client, validates answers against live schema
// objects, and retries with the parser's complaint appended. Safe to share
// across threads.
class Gateway {
public:
    explicit Gateway(CompletionClient& client, int retries = 2);

    int retries() const noexcept { return retries_; }
    CompletionClient& client() noexcept { return client_; }

    std::vector<RollupGroup> request_rollup(std::string_view schema_name, const Table& table,
                                            const ElementConfig& cfg, Warnings& warnings);
    std::vector<std::string> request_table_selection(const Table& source, std::span<const Table> targets,
                                                     const ElementConfig& cfg, Warnings& warnings);
    std::vector<Correspondence> request_column_matches(const Table& source, std::span<const Table> candidates,
                                                       const ElementConfig& cfg, Warnings& warnings);
    std::vector<Correspondence> request_drilldown(const Correspondence& match, const DrilldownSide& source,
                                                  const DrilldownSide& target, const ElementConfig& cfg,
                                                  Warnings& warnings);

    GatewayCounters counters() const;

private:
    template <class Result, class Parse>
    std::optional<Result> exchange(Prompt prompt, Parse&& parse, Warnings& warnings);

    CompletionClient& client_;
    int retries_;
    mutable std::mutex mu_;
    GatewayCounters counters_;
};

// Prompt builders; byte-identical output for identical inputs.
Prompt build_rollup_prompt(std::string_view schema_name, const Table& table, const ElementConfig& cfg);
Prompt build_table_selection_prompt(const Table& source, std::span<const Table> targets, const ElementConfig& cfg);
Prompt build_column_match_prompt(const Table& source, std::span<const Table> candidates, const ElementConfig& cfg);
Prompt build_drilldown_prompt(const Correspondence& match, const DrilldownSide& source, const DrilldownSide& target,
                              const ElementConfig& cfg);

}  // namespace schemamatch
