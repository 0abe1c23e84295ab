#include "schemamatch/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

void warn(LoadDiagnostics* diag, std::string message) {
    if (diag) diag->warnings.push_back(std::move(message));
}

void warn_unknown_fields(const Json& obj, std::initializer_list<std::string_view> known,
                         const std::string& where, LoadDiagnostics* diag) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto k : known) ok = ok || it.key() == k;
        if (!ok) warn(diag, "unknown field '" + it.key() + "' in " + where + " ignored");
    }
}

const Json& require(const Json& obj, const char* field, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + field + "'");
    return *it;
}

std::string require_string(const Json& obj, const char* field, const std::string& where) {
    const Json& v = require(obj, field, where);
    if (!v.is_string()) throw ParseError(where + ": field '" + field + "' must be a string");
    return v.get<std::string>();
}

std::string optional_string(const Json& obj, const char* field, const std::string& where) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(where + ": field '" + field + "' must be a string");
    return it->get<std::string>();
}

const Json& require_array(const Json& obj, const char* field, const std::string& where) {
    const Json& v = require(obj, field, where);
    if (!v.is_array()) throw ParseError(where + ": field '" + field + "' must be a list");
    return v;
}

void validate(const Schema& s) {
    std::vector<std::string> errors;
    std::set<std::string> table_keys;
    for (const auto& t : s.tables) {
        const std::string where = "table '" + t.name + "'";
        if (trim(t.name).empty()) errors.push_back("table with empty name");
        if (!table_keys.insert(ident_key(t.name)).second) errors.push_back("duplicate " + where);
        if (t.columns.empty()) errors.push_back(where + " has no columns");
        std::set<std::string> column_keys;
        for (const auto& c : t.columns) {
            if (trim(c.name).empty()) errors.push_back(where + " has a column with empty name");
            if (!column_keys.insert(ident_key(c.name)).second)
                errors.push_back(where + " has duplicate column '" + c.name + "'");
        }
    }
    for (const auto& t : s.tables) {
        for (const auto& fk : t.foreign_keys) {
            const std::string ref = t.name + "." + fk.column + " -> " + fk.ref_table + "." + fk.ref_column;
            if (!t.find_column(fk.column)) {
                errors.push_back("foreign key " + ref + ": column '" + fk.column + "' not in table '" +
                                 t.name + "'");
            }
            const Table* rt = s.find_table(fk.ref_table);
            if (!rt) {
                errors.push_back("dangling foreign key " + ref + ": table '" + fk.ref_table + "' not found");
                continue;
            }
            const Column* rc = rt->find_column(fk.ref_column);
            if (!rc) {
                errors.push_back("dangling foreign key " + ref + ": column '" + fk.ref_column +
                                 "' not in table '" + rt->name + "'");
                continue;
            }
            if (!rc->is_primary_key)
                errors.push_back("foreign key " + ref + ": referenced column is not a primary key");
            if (ident_equal(rt->name, t.name) && ident_equal(fk.ref_column, fk.column))
                errors.push_back("foreign key " + ref + " references itself");
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("validation failed: " + join(violations, "; ")), violations_(std::move(violations)) {}

BudgetTooSmall::BudgetTooSmall(std::string item, std::size_t required, std::size_t available)
    : Error("budget too small: '" + item + "' needs " + std::to_string(required) + " words but only " +
            std::to_string(available) + " fit in one prompt"),
      item_(std::move(item)),
      required_(required),
      available_(available) {}

const Column* Table::find_column(std::string_view name) const {
    const std::string key = ident_key(name);
    for (const auto& c : columns)
        if (ident_key(c.name) == key) return &c;
    return nullptr;
}

const ForeignKey* Table::foreign_key_of(std::string_view column) const {
    const std::string key = ident_key(column);
    for (const auto& fk : foreign_keys)
        if (ident_key(fk.column) == key) return &fk;
    return nullptr;
}

const Table* Schema::find_table(std::string_view name) const {
    const std::string key = ident_key(name);
    for (const auto& t : tables)
        if (ident_key(t.name) == key) return &t;
    return nullptr;
}

std::string ColumnRef::key() const { return ident_key(table) + "." + ident_key(column); }

const char* to_string(Stage stage) {
    switch (stage) {
        case Stage::baseline: return "baseline";
        case Stage::llm_match: return "llm_match";
        case Stage::drilldown: return "drilldown";
    }
    return "baseline";
}

std::optional<Stage> parse_stage(std::string_view text) {
    if (text == "baseline") return Stage::baseline;
    if (text == "llm_match") return Stage::llm_match;
    if (text == "drilldown") return Stage::drilldown;
    return std::nullopt;
}

MatchSet::Key MatchSet::key_of(const ColumnRef& source, const ColumnRef& target) {
    return {source.key(), target.key()};
}

bool MatchSet::insert(Correspondence c) {
    auto key = key_of(c.source, c.target);
    return pairs_.emplace(std::move(key), std::move(c)).second;
}

bool MatchSet::contains(const ColumnRef& source, const ColumnRef& target) const {
    return pairs_.count(key_of(source, target)) > 0;
}

std::vector<Correspondence> MatchSet::to_vector() const {
    std::vector<Correspondence> out;
    out.reserve(pairs_.size());
    for (const auto& [_, c] : pairs_) out.push_back(c);
    return out;
}

bool MatchSet::same_pairs(const MatchSet& other) const {
    if (size() != other.size()) return false;
    for (auto a = pairs_.begin(), b = other.pairs_.begin(); a != pairs_.end(); ++a, ++b)
        if (a->first != b->first) return false;
    return true;
}

Schema load_schema(const Json& doc, LoadDiagnostics* diag) {
    if (!doc.is_object()) throw ParseError("schema document must be an object");
    Schema s;
    s.name = require_string(doc, "name", "schema");
    warn_unknown_fields(doc, {"name", "tables"}, "schema", diag);
    const Json& tables = require_array(doc, "tables", "schema");
    for (std::size_t ti = 0; ti < tables.size(); ++ti) {
        const Json& jt = tables[ti];
        const std::string where = "tables[" + std::to_string(ti) + "]";
        Table t;
        t.name = require_string(jt, "name", where);
        t.description = optional_string(jt, "description", where);
        warn_unknown_fields(jt, {"name", "description", "columns", "foreign_keys"}, where, diag);
        const Json& cols = require_array(jt, "columns", where);
        for (std::size_t ci = 0; ci < cols.size(); ++ci) {
            const Json& jc = cols[ci];
            const std::string cwhere = where + ".columns[" + std::to_string(ci) + "]";
            Column c;
            c.name = require_string(jc, "name", cwhere);
            c.data_type = optional_string(jc, "type", cwhere);
            c.description = optional_string(jc, "description", cwhere);
            if (auto it = jc.find("primary_key"); it != jc.end() && !it->is_null()) {
                if (!it->is_boolean()) throw ParseError(cwhere + ": field 'primary_key' must be a boolean");
                c.is_primary_key = it->get<bool>();
            }
            warn_unknown_fields(jc, {"name", "type", "description", "primary_key"}, cwhere, diag);
            t.columns.push_back(std::move(c));
        }
        if (auto it = jt.find("foreign_keys"); it != jt.end() && !it->is_null()) {
            if (!it->is_array()) throw ParseError(where + ": field 'foreign_keys' must be a list");
            for (std::size_t fi = 0; fi < it->size(); ++fi) {
                const Json& jf = (*it)[fi];
                const std::string fwhere = where + ".foreign_keys[" + std::to_string(fi) + "]";
                ForeignKey fk;
                fk.column = require_string(jf, "column", fwhere);
                fk.ref_table = require_string(jf, "ref_table", fwhere);
                fk.ref_column = require_string(jf, "ref_column", fwhere);
                warn_unknown_fields(jf, {"column", "ref_table", "ref_column"}, fwhere, diag);
                t.foreign_keys.push_back(std::move(fk));
            }
        }
        s.tables.push_back(std::move(t));
    }
    validate(s);
    return s;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

Schema load_schema_file(const std::filesystem::path& path, LoadDiagnostics* diag) {
    return load_schema(read_json_file(path), diag);
}

Json schema_to_json(const Schema& schema) {
    Json tables = Json::array();
    for (const auto& t : schema.tables) {
        Json jt;
        jt["name"] = t.name;
        if (!t.description.empty()) jt["description"] = t.description;
        Json cols = Json::array();
        for (const auto& c : t.columns) {
            Json jc;
            jc["name"] = c.name;
            if (!c.data_type.empty()) jc["type"] = c.data_type;
            if (!c.description.empty()) jc["description"] = c.description;
            if (c.is_primary_key) jc["primary_key"] = true;
            cols.push_back(std::move(jc));
        }
        jt["columns"] = std::move(cols);
        if (!t.foreign_keys.empty()) {
            Json fks = Json::array();
            for (const auto& fk : t.foreign_keys)
                fks.push_back({{"column", fk.column}, {"ref_table", fk.ref_table}, {"ref_column", fk.ref_column}});
            jt["foreign_keys"] = std::move(fks);
        }
        tables.push_back(std::move(jt));
    }
    return Json{{"name", schema.name}, {"tables", std::move(tables)}};
}

std::optional<ColumnRef> resolve(const Schema& schema, std::string_view table, std::string_view column) {
    const Table* t = schema.find_table(table);
    if (!t) return std::nullopt;
    const Column* c = t->find_column(column);
    if (!c) return std::nullopt;
    return ColumnRef{t->name, c->name};
}

MatchSet load_ground_truth(const Json& doc, const Schema& source, const Schema& target,
                           LoadDiagnostics* diag) {
    if (!doc.is_object()) throw ParseError("mapping document must be an object");
    warn_unknown_fields(doc, {"pairs"}, "mapping", diag);
    const Json& pairs = require_array(doc, "pairs", "mapping");
    MatchSet out;
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Json& jp = pairs[i];
        const std::string where = "pairs[" + std::to_string(i) + "]";
        const auto st = require_string(jp, "source_table", where);
        const auto sc = require_string(jp, "source_column", where);
        const auto tt = require_string(jp, "target_table", where);
        const auto tc = require_string(jp, "target_column", where);
        warn_unknown_fields(jp, {"source_table", "source_column", "target_table", "target_column", "stage", "confidence"},
                            where, diag);
        auto src = resolve(source, st, sc);
        auto tgt = resolve(target, tt, tc);
        if (!src) errors.push_back(where + ": source " + st + "." + sc + " does not resolve in '" + source.name + "'");
        if (!tgt) errors.push_back(where + ": target " + tt + "." + tc + " does not resolve in '" + target.name + "'");
        if (!src || !tgt) continue;
        Correspondence c{*src, *tgt, std::nullopt, std::nullopt};
        if (auto it = jp.find("stage"); it != jp.end() && it->is_string()) c.stage = parse_stage(it->get<std::string>());
        if (auto it = jp.find("confidence"); it != jp.end() && it->is_number()) c.confidence = it->get<double>();
        if (!out.insert(std::move(c))) {
            if (diag) ++diag->duplicates;
            warn(diag, where + ": duplicate pair collapsed");
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return out;
}

MatchSet load_ground_truth_file(const std::filesystem::path& path, const Schema& source,
                                const Schema& target, LoadDiagnostics* diag) {
    return load_ground_truth(read_json_file(path), source, target, diag);
}

Json matchset_to_json(const MatchSet& set) {
    Json pairs = Json::array();
    for (const auto& [_, c] : set) {
        Json jp{{"source_table", c.source.table},
                {"source_column", c.source.column},
                {"target_table", c.target.table},
                {"target_column", c.target.column}};
        if (c.stage) jp["stage"] = to_string(*c.stage);
        if (c.confidence) jp["confidence"] = *c.confidence;
        pairs.push_back(std::move(jp));
    }
    return Json{{"pairs", std::move(pairs)}};
}

SchemaStats schema_stats(const Schema& schema) {
    SchemaStats st;
    st.table_count = schema.tables.size();
    for (const auto& t : schema.tables) {
        st.column_count += t.columns.size();
        st.fk_count += t.foreign_keys.size();
        for (const auto& c : t.columns)
            if (c.is_primary_key) ++st.pk_count;
    }
    if (st.table_count > 0)
        st.avg_columns_per_table = static_cast<double>(st.column_count) / static_cast<double>(st.table_count);
    return st;
}

MappingStats mapping_stats(const MatchSet& gold, const Schema&, const Schema&) {
    MappingStats st;
    st.total_pairs = gold.size();
    if (gold.empty()) return st;

    std::map<std::string, std::set<std::string>> targets_per_source_table;
    std::map<std::string, int> source_uses;
    std::map<std::string, int> target_uses;
    for (const auto& [_, c] : gold) {
        targets_per_source_table[ident_key(c.source.table)].insert(ident_key(c.target.table));
        ++source_uses[c.source.key()];
        ++target_uses[c.target.key()];
    }
    double total = 0.0;
    for (const auto& [_, targets] : targets_per_source_table) total += static_cast<double>(targets.size());
    st.avg_target_tables_per_source_table = total / static_cast<double>(targets_per_source_table.size());

    std::size_t simple = 0;
    for (const auto& [_, c] : gold)
        if (source_uses[c.source.key()] == 1 && target_uses[c.target.key()] == 1) ++simple;
    st.one_to_one_ratio = static_cast<double>(simple) / static_cast<double>(gold.size());
    return st;
}

}  // namespace schemamatch
