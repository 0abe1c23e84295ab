#include "schemamatch/llm.hpp"

#include <algorithm>
#include <set>

#include "http.hpp"
#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

namespace {

// An answer that parsed but cannot be used as a whole; triggers a retry.
class ResponseError : public Error {
public:
    using Error::Error;
};

std::string quote(std::string_view s) { return "'" + std::string(s) + "'"; }

std::vector<std::string> column_names(const Table& t) {
    std::vector<std::string> out;
    out.reserve(t.columns.size());
    for (const auto& c : t.columns) out.push_back(c.name);
    return out;
}

// Exact match first, then case-insensitive with a warning.
std::optional<std::string> resolve_name(std::span<const std::string> names, std::string_view given,
                                        Warnings& warnings, std::string_view what) {
    for (const auto& n : names)
        if (n == given) return n;
    const std::string key = ident_key(given);
    for (const auto& n : names) {
        if (ident_key(n) == key) {
            warnings.push_back(std::string(what) + " " + quote(given) + " resolved case-insensitively to " + quote(n));
            return n;
        }
    }
    return std::nullopt;
}

const Json& require_list(const Json& doc, const char* field) {
    auto it = doc.find(field);
    if (it == doc.end() || !it->is_array())
        throw ResponseError(std::string("answer must be an object with a '") + field + "' list");
    return *it;
}

std::optional<std::string> string_field(const Json& obj, const char* field) {
    if (!obj.is_object()) return std::nullopt;
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

std::string retry_suffix(std::string_view error) {
    return "\n\nYour previous answer could not be used: " + std::string(error) +
           "\nAnswer again with only the JSON object described above.\n";
}

std::string render_tables(std::span<const Table> tables, const ElementConfig& cfg) {
    std::string out;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) out += '\n';
        out += serialize_table(tables[i], cfg);
    }
    return out;
}

std::string render_side(const DrilldownSide& side, const ElementConfig& cfg) {
    std::string out;
    for (const auto& name : side.columns) {
        const Column* c = side.table ? side.table->find_column(name) : nullptr;
        out += c ? serialize_column(*side.table, *c, cfg) : "column " + name;
        out += '\n';
    }
    return out;
}

std::set<std::string> key_set(std::span<const std::string> names) {
    std::set<std::string> out;
    for (const auto& n : names) out.insert(ident_key(n));
    return out;
}

}  // namespace

const char* to_string(PromptKind kind) {
    switch (kind) {
        case PromptKind::rollup: return "rollup";
        case PromptKind::table_selection: return "table_selection";
        case PromptKind::column_match: return "column_match";
        case PromptKind::drilldown: return "drilldown";
    }
    return "rollup";
}

std::optional<PromptKind> parse_prompt_kind(std::string_view text) {
    const std::string key = ident_key(text);
    if (key == "rollup") return PromptKind::rollup;
    if (key == "table_selection" || key == "selection") return PromptKind::table_selection;
    if (key == "column_match" || key == "match") return PromptKind::column_match;
    if (key == "drilldown") return PromptKind::drilldown;
    return std::nullopt;
}

std::string empty_response(PromptKind kind) {
    switch (kind) {
        case PromptKind::rollup: return R"({"groups":[]})";
        case PromptKind::table_selection: return R"({"tables":[]})";
        case PromptKind::column_match:
        case PromptKind::drilldown: return R"({"matches":[]})";
    }
    return "{}";
}

Json extract_structured(std::string_view response) {
    const auto start = response.find('{');
    if (start == std::string_view::npos) throw ParseError("no JSON object found in response");
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < response.size(); ++i) {
        const char c = response[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) {
            try {
                return Json::parse(response.substr(start, i - start + 1));
            } catch (const Json::parse_error& e) {
                throw ParseError(std::string("malformed JSON in response: ") + e.what());
            }
        }
    }
    throw ParseError("unbalanced braces in response");
}

// --- Prompts ---------------------------------------------------------------

Prompt build_rollup_prompt(std::string_view schema_name, const Table& table, const ElementConfig& cfg) {
    Prompt p;
    p.kind = PromptKind::rollup;
    p.schema = std::string(schema_name);
    p.table = table.name;
    p.source_columns = column_names(table);
    p.text = "Task: rollup\n"
             "The table below belongs to schema \"" + p.schema + "\". Find groups of two or more columns that "
             "describe one concept and could be merged under a single alias. Leave every other column out.\n"
             "Rules: a column belongs to at most one group; an alias must not reuse an existing column name.\n"
             "Answer with one JSON object: "
             R"({"groups":[{"alias":"<new name>","columns":["<column>"],"description":"<meaning of the alias>"}]})"
             "\nUse {\"groups\":[]} when nothing should be merged.\n\n" +
             serialize_table(table, cfg);
    return p;
}

Prompt build_table_selection_prompt(const Table& source, std::span<const Table> targets, const ElementConfig& cfg) {
    Prompt p;
    p.kind = PromptKind::table_selection;
    p.table = source.name;
    p.source_columns = column_names(source);
    for (const auto& t : targets) p.candidates.push_back(t.name);
    p.text = "Task: table selection\n"
             "Which target tables hold columns that correspond to columns of the source table? "
             "List every relevant target table and nothing else.\n"
             "Answer with one JSON object: " R"({"tables":["<target table>"]})" "\n\n"
             "Source table:\n" + serialize_table(source, cfg) + "\nTarget tables:\n" + render_tables(targets, cfg);
    return p;
}

Prompt build_column_match_prompt(const Table& source, std::span<const Table> candidates, const ElementConfig& cfg) {
    Prompt p;
    p.kind = PromptKind::column_match;
    p.table = source.name;
    p.source_columns = column_names(source);
    for (const auto& t : candidates) {
        p.candidates.push_back(t.name);
        for (const auto& c : t.columns) p.target_columns.push_back({t.name, c.name});
    }
    p.text = "Task: column matching\n"
             "Match each source column to the target columns that hold the same information. "
             "A source column may match several target columns or none.\n"
             "Answer with one JSON object: "
             R"({"matches":[{"source_column":"<column>","target_table":"<table>","target_column":"<column>"}]})"
             "\n\nSource table:\n" + serialize_table(source, cfg) + "\nCandidate target tables:\n" +
             render_tables(candidates, cfg);
    return p;
}

Prompt build_drilldown_prompt(const Correspondence& match, const DrilldownSide& source, const DrilldownSide& target,
                              const ElementConfig& cfg) {
    Prompt p;
    p.kind = PromptKind::drilldown;
    p.table = match.source.table;
    p.column = match.source.column;
    p.candidates = {match.target.table};
    p.source_columns = source.columns;
    for (const auto& c : target.columns) p.target_columns.push_back({match.target.table, c});

    std::string grouped;
    if (source.alias) grouped += " " + *source.alias + " stands for the source candidates below.";
    if (target.alias) grouped += " " + *target.alias + " stands for the target candidates below.";
    p.text = "Task: drilldown\n"
             "The source column " + match.source.display() + " was matched to " + match.target.display() + "." +
             grouped + "\nDecide which candidate pairs actually correspond. Leave out pairs that do not; "
             "an empty list is allowed.\n"
             "Answer with one JSON object: " R"({"matches":[{"source_column":"<column>","target_column":"<column>"}]})"
             "\n\nSource candidates from table " + match.source.table + ":\n" + render_side(source, cfg) +
             "\nTarget candidates from table " + match.target.table + ":\n" + render_side(target, cfg);
    return p;
}

// --- Clients ---------------------------------------------------------------

RemoteClient::RemoteClient(RemoteClientOptions options)
    : options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_concurrency, 1, 64))) {
    if (options_.endpoint.empty()) throw ConfigError("remote client needs LLM_ENDPOINT");
    if (options_.model.empty()) throw ConfigError("remote client needs LLM_MODEL");
}

std::string RemoteClient::request_body(std::string_view text) const {
    Json body{{"model", options_.model},
              {"messages", Json::array({Json{{"role", "user"}, {"content", std::string(text)}}})}};
    if (options_.temperature) body["temperature"] = *options_.temperature;
    return body.dump();
}

std::string RemoteClient::complete(const Prompt& prompt) {
    slots_.acquire();
    struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
    } release{slots_};

    detail::Headers headers;
    if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);
    std::string raw;
    try {
        raw = detail::http_post_json(options_.endpoint, request_body(prompt.text), headers, options_.timeout_seconds);
    } catch (const std::exception& e) {
        throw ClientError(e.what());
    }
    try {
        const Json reply = Json::parse(raw);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw ClientError(std::string("unexpected completion reply: ") + e.what());
    }
}

ScriptedClient::ScriptedClient(std::vector<Record> records) {
    for (auto& r : records) add(std::move(r));
}

ScriptedClient ScriptedClient::from_json(const Json& doc) {
    const Json* list = &doc;
    if (doc.is_object() && doc.contains("records")) list = &doc.at("records");
    if (!list->is_array()) throw ParseError("transcript must be a list of records");
    ScriptedClient client;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const Json& jr = (*list)[i];
        const std::string where = "transcript[" + std::to_string(i) + "]";
        if (!jr.is_object()) throw ParseError(where + ": expected an object");
        Record r;
        auto kind = string_field(jr, "kind");
        if (!kind || !parse_prompt_kind(*kind)) throw ParseError(where + ": missing or unknown 'kind'");
        r.kind = *parse_prompt_kind(*kind);
        auto table = string_field(jr, "table");
        if (!table) throw ParseError(where + ": missing 'table'");
        r.table = *table;
        r.schema = string_field(jr, "schema");
        r.column = string_field(jr, "column");
        if (auto it = jr.find("candidates"); it != jr.end()) {
            if (!it->is_array()) throw ParseError(where + ": 'candidates' must be a list");
            r.candidates = it->get<std::vector<std::string>>();
        }
        auto resp = jr.find("response");
        if (resp == jr.end()) throw ParseError(where + ": missing 'response'");
        r.response = resp->is_string() ? resp->get<std::string>() : resp->dump();
        client.add(std::move(r));
    }
    return client;
}

ScriptedClient::ScriptedClient(ScriptedClient&& other) noexcept {
    std::lock_guard lock(other.mu_);
    queues_ = std::move(other.queues_);
    served_ = other.served_;
    unmatched_ = other.unmatched_;
}

ScriptedClient ScriptedClient::from_file(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

bool ScriptedClient::same_key(const Record& a, const Record& b) {
    auto opt_eq = [](const std::optional<std::string>& x, const std::optional<std::string>& y) {
        return x.has_value() == y.has_value() && (!x || ident_equal(*x, *y));
    };
    if (a.kind != b.kind || !ident_equal(a.table, b.table) || !opt_eq(a.schema, b.schema) || !opt_eq(a.column, b.column))
        return false;
    if (a.candidates.has_value() != b.candidates.has_value()) return false;
    return !a.candidates || key_set(*a.candidates) == key_set(*b.candidates);
}

bool ScriptedClient::matches(const Record& key, const Prompt& p) {
    if (key.kind != p.kind || !ident_equal(key.table, p.table)) return false;
    if (key.schema && !ident_equal(*key.schema, p.schema)) return false;
    if (key.column && !ident_equal(*key.column, p.column)) return false;
    if (key.candidates && key_set(*key.candidates) != key_set(p.candidates)) return false;
    return true;
}

void ScriptedClient::add(Record record) {
    std::lock_guard lock(mu_);
    for (auto& q : queues_) {
        if (same_key(q.key, record)) {
            q.responses.push_back(std::move(record.response));
            return;
        }
    }
    Queue q;
    q.responses.push_back(record.response);
    q.key = std::move(record);
    queues_.push_back(std::move(q));
}

std::string ScriptedClient::complete(const Prompt& prompt) {
    std::lock_guard lock(mu_);
    Queue* best = nullptr;
    int best_specificity = -1;
    for (auto& q : queues_) {
        if (!matches(q.key, prompt)) continue;
        const int specificity = int(q.key.schema.has_value()) + int(q.key.column.has_value()) +
                                int(q.key.candidates.has_value());
        if (specificity > best_specificity) {
            best = &q;
            best_specificity = specificity;
        }
    }
    if (!best) {
        ++unmatched_;
        return empty_response(prompt.kind);
    }
    ++served_;
    const std::size_t i = std::min(best->next, best->responses.size() - 1);
    ++best->next;
    return best->responses[i];
}

std::size_t ScriptedClient::served() const {
    std::lock_guard lock(mu_);
    return served_;
}

std::size_t ScriptedClient::unmatched() const {
    std::lock_guard lock(mu_);
    return unmatched_;
}

OracleClient::OracleClient(MatchSet gold) : gold_(std::move(gold)) {}

std::string OracleClient::complete(const Prompt& p) {
    const std::string table = ident_key(p.table);
    const auto candidates = key_set(p.candidates);
    const auto sources = key_set(p.source_columns);
    std::set<std::string> targets;
    for (const auto& r : p.target_columns) targets.insert(r.key());

    auto offered = [&](const Correspondence& c) {
        return ident_key(c.source.table) == table && sources.count(ident_key(c.source.column)) &&
               targets.count(c.target.key());
    };

    switch (p.kind) {
        case PromptKind::rollup:
            return empty_response(p.kind);
        case PromptKind::table_selection: {
            std::set<std::string> mapped;
            for (const auto& [_, c] : gold_)
                if (ident_key(c.source.table) == table) mapped.insert(ident_key(c.target.table));
            Json tables = Json::array();
            for (const auto& name : p.candidates)
                if (mapped.count(ident_key(name))) tables.push_back(name);
            return Json{{"tables", tables}}.dump();
        }
        case PromptKind::column_match: {
            Json matches = Json::array();
            for (const auto& [_, c] : gold_)
                if (offered(c) && candidates.count(ident_key(c.target.table)))
                    matches.push_back({{"source_column", c.source.column},
                                       {"target_table", c.target.table},
                                       {"target_column", c.target.column}});
            return Json{{"matches", matches}}.dump();
        }
        case PromptKind::drilldown: {
            Json matches = Json::array();
            for (const auto& [_, c] : gold_)
                if (offered(c)) matches.push_back({{"source_column", c.source.column}, {"target_column", c.target.column}});
            return Json{{"matches", matches}}.dump();
        }
    }
    return "{}";
}

// --- Registry --------------------------------------------------------------

void RollupRegistry::add(RollupGroup group) {
    auto key = std::make_pair(ident_key(group.table), ident_key(group.alias));
    if (index_.count(key))
        throw ValidationError({"alias " + quote(group.alias) + " registered twice for table " + quote(group.table)});
    index_.emplace(std::move(key), groups_.size());
    groups_.push_back(std::move(group));
}

const RollupGroup* RollupRegistry::find(std::string_view table, std::string_view alias) const {
    auto it = index_.find({ident_key(table), ident_key(alias)});
    return it == index_.end() ? nullptr : &groups_[it->second];
}

std::vector<const RollupGroup*> RollupRegistry::groups_of(std::string_view table) const {
    std::vector<const RollupGroup*> out;
    const std::string key = ident_key(table);
    for (const auto& g : groups_)
        if (ident_key(g.table) == key) out.push_back(&g);
    return out;
}

// --- Gateway ---------------------------------------------------------------

Gateway::Gateway(CompletionClient& client, int retries) : client_(client), retries_(retries) {
    if (retries_ < 0) throw ConfigError("llm.retries must be >= 0");
}

GatewayCounters Gateway::counters() const {
    std::lock_guard lock(mu_);
    return counters_;
}

template <class Result, class Parse>
std::optional<Result> Gateway::exchange(Prompt prompt, Parse&& parse, Warnings& warnings) {
    const std::string base = prompt.text;
    const std::string what = std::string(to_string(prompt.kind)) + " for " + quote(prompt.table) +
                             (prompt.column.empty() ? "" : " column " + quote(prompt.column));
    for (int attempt = 0; attempt <= retries_; ++attempt) {
        prompt.attempt = attempt;
        {
            std::lock_guard lock(mu_);
            ++counters_.prompts;
            ++counters_.prompts_by_kind[to_string(prompt.kind)];
            counters_.words_sent += word_count(prompt.text);
            if (attempt > 0) ++counters_.retries;
        }
        std::string response;
        try {
            response = client_.complete(prompt);
        } catch (const ClientError& e) {
            if (attempt == retries_) throw;
            warnings.push_back(what + ": client error on attempt " + std::to_string(attempt + 1) + ": " + e.what());
            continue;
        }
        Warnings local;
        try {
            Result result = parse(response, local);
            warnings.insert(warnings.end(), local.begin(), local.end());
            return result;
        } catch (const Error& e) {  // ParseError or ResponseError
            warnings.push_back(what + ": unusable answer on attempt " + std::to_string(attempt + 1) + ": " + e.what());
            prompt.text = base + retry_suffix(e.what());
        }
    }
    warnings.push_back(what + ": giving up after " + std::to_string(retries_ + 1) + " attempts");
    return std::nullopt;
}

std::vector<RollupGroup> Gateway::request_rollup(std::string_view schema_name, const Table& table,
                                                 const ElementConfig& cfg, Warnings& warnings) {
    const auto names = column_names(table);
    auto parse = [&](const std::string& response, Warnings& local) {
        const Json doc = extract_structured(response);
        const Json& groups = require_list(doc, "groups");
        std::vector<RollupGroup> out;
        std::set<std::string> used;
        std::set<std::string> aliases;
        for (const auto& jg : groups) {
            auto alias = string_field(jg, "alias");
            if (!alias || trim(*alias).empty()) throw ResponseError("every group needs a non-empty 'alias'");
            auto cols = jg.find("columns");
            if (cols == jg.end() || !cols->is_array()) throw ResponseError("group " + quote(*alias) + " has no 'columns' list");
            if (table.find_column(*alias)) throw ResponseError("alias " + quote(*alias) + " collides with an existing column");
            if (!aliases.insert(ident_key(*alias)).second) throw ResponseError("alias " + quote(*alias) + " used twice");
            RollupGroup g{table.name, *alias, {}, string_field(jg, "description").value_or("")};
            for (const auto& jc : *cols) {
                if (!jc.is_string()) throw ResponseError("group " + quote(*alias) + " lists a non-string column");
                auto name = resolve_name(names, jc.get<std::string>(), local, "column");
                if (!name) throw ResponseError("group " + quote(*alias) + " names unknown column " + quote(jc.get<std::string>()));
                if (!used.insert(ident_key(*name)).second)
                    throw ResponseError("column " + quote(*name) + " appears in more than one group");
                g.members.push_back(*name);
            }
            if (g.members.size() < 2) throw ResponseError("group " + quote(*alias) + " needs at least two columns");
            out.push_back(std::move(g));
        }
        return out;
    };
    auto result = exchange<std::vector<RollupGroup>>(build_rollup_prompt(schema_name, table, cfg), parse, warnings);
    return result.value_or(std::vector<RollupGroup>{});
}

std::vector<std::string> Gateway::request_table_selection(const Table& source, std::span<const Table> targets,
                                                          const ElementConfig& cfg, Warnings& warnings) {
    if (targets.empty()) throw ConfigError("table selection needs at least one target table");
    std::vector<std::string> names;
    for (const auto& t : targets) names.push_back(t.name);
    auto parse = [&](const std::string& response, Warnings& local) {
        const Json doc = extract_structured(response);
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (const auto& jt : require_list(doc, "tables")) {
            if (!jt.is_string()) {
                local.push_back("table selection for " + quote(source.name) + ": non-string entry dropped");
                continue;
            }
            auto name = resolve_name(names, jt.get<std::string>(), local, "table");
            if (!name) {
                local.push_back("table selection for " + quote(source.name) + ": unknown table " +
                                quote(jt.get<std::string>()) + " dropped");
                continue;
            }
            if (seen.insert(ident_key(*name)).second) out.push_back(*name);
        }
        return out;
    };
    auto result =
        exchange<std::vector<std::string>>(build_table_selection_prompt(source, targets, cfg), parse, warnings);
    return result.value_or(std::vector<std::string>{});
}

std::vector<Correspondence> Gateway::request_column_matches(const Table& source, std::span<const Table> candidates,
                                                            const ElementConfig& cfg, Warnings& warnings) {
    if (candidates.empty()) throw ConfigError("column matching needs at least one candidate table");
    const auto source_names = column_names(source);
    std::vector<std::string> table_names;
    for (const auto& t : candidates) table_names.push_back(t.name);
    auto parse = [&](const std::string& response, Warnings& local) {
        const Json doc = extract_structured(response);
        std::vector<Correspondence> out;
        std::set<MatchSet::Key> seen;
        const std::string what = "column match for " + quote(source.name);
        for (const auto& jm : require_list(doc, "matches")) {
            auto sc = string_field(jm, "source_column");
            auto tt = string_field(jm, "target_table");
            auto tc = string_field(jm, "target_column");
            if (!sc || !tt || !tc) {
                local.push_back(what + ": malformed entry dropped");
                continue;
            }
            auto s_name = resolve_name(source_names, *sc, local, "source column");
            auto t_table = resolve_name(table_names, *tt, local, "target table");
            if (!s_name || !t_table) {
                local.push_back(what + ": entry " + quote(*sc) + " -> " + quote(*tt + "." + *tc) +
                                " does not resolve, dropped");
                continue;
            }
            const Table* target = nullptr;
            for (const auto& t : candidates)
                if (t.name == *t_table) target = &t;
            auto t_name = resolve_name(column_names(*target), *tc, local, "target column");
            if (!t_name) {
                local.push_back(what + ": unknown target column " + quote(*tt + "." + *tc) + " dropped");
                continue;
            }
            Correspondence c{{source.name, *s_name}, {target->name, *t_name}, Stage::llm_match, std::nullopt};
            if (seen.insert(MatchSet::key_of(c.source, c.target)).second) out.push_back(std::move(c));
        }
        return out;
    };
    auto result =
        exchange<std::vector<Correspondence>>(build_column_match_prompt(source, candidates, cfg), parse, warnings);
    return result.value_or(std::vector<Correspondence>{});
}

std::vector<Correspondence> Gateway::request_drilldown(const Correspondence& match, const DrilldownSide& source,
                                                       const DrilldownSide& target, const ElementConfig& cfg,
                                                       Warnings& warnings) {
    if (!source.alias && !target.alias) throw ConfigError("drilldown needs an alias on at least one side");
    auto parse = [&](const std::string& response, Warnings& local) {
        const Json doc = extract_structured(response);
        std::vector<Correspondence> out;
        std::set<MatchSet::Key> seen;
        const std::string what = "drilldown of " + quote(match.source.display() + " -> " + match.target.display());
        for (const auto& jm : require_list(doc, "matches")) {
            auto sc = string_field(jm, "source_column");
            auto tc = string_field(jm, "target_column");
            if (!sc || !tc) {
                local.push_back(what + ": malformed entry dropped");
                continue;
            }
            auto s_name = resolve_name(source.columns, *sc, local, "source column");
            auto t_name = resolve_name(target.columns, *tc, local, "target column");
            if (!s_name || !t_name) {
                local.push_back(what + ": " + quote(*sc) + " -> " + quote(*tc) + " outside the candidate columns, dropped");
                continue;
            }
            Correspondence c{{match.source.table, *s_name}, {match.target.table, *t_name}, Stage::drilldown, std::nullopt};
            if (seen.insert(MatchSet::key_of(c.source, c.target)).second) out.push_back(std::move(c));
        }
        return out;
    };
    auto result = exchange<std::vector<Correspondence>>(build_drilldown_prompt(match, source, target, cfg), parse,
                                                        warnings);
    return result.value_or(std::vector<Correspondence>{});
}

}  // namespace schemamatch
