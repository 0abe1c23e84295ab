#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "schemamatch/schema.hpp"

namespace support {

using schemamatch::Json;

inline std::filesystem::path data_file(std::string_view name) {
    return std::filesystem::path(SCHEMAMATCH_DATA_DIR) / name;
}

inline std::filesystem::path golden_file(std::string_view name) {
    return std::filesystem::path(SCHEMAMATCH_GOLDEN_DIR) / name;
}

struct Pair {
    schemamatch::Schema source;
    schemamatch::Schema target;
    schemamatch::MatchSet gold;
};

inline Pair load_pair(std::string_view src, std::string_view tgt, std::string_view gold) {
    Pair p;
    p.source = schemamatch::load_schema_file(data_file(src));
    p.target = schemamatch::load_schema_file(data_file(tgt));
    p.gold = schemamatch::load_ground_truth_file(data_file(gold), p.source, p.target);
    return p;
}

inline Pair bank() { return load_pair("toy_bank1.schema.json", "toy_bank2.schema.json", "toy_bank.mapping.json"); }
inline Pair clinic() { return load_pair("toy_clinic.schema.json", "toy_omop.schema.json", "toy_clinic.mapping.json"); }

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    template <class T>
    const T& pick(const std::vector<T>& xs) {
        return xs[static_cast<std::size_t>(uniform(0, static_cast<int>(xs.size()) - 1))];
    }

    std::string word() {
        static const std::vector<std::string> words{
            "customer", "account", "order",  "item",   "price",  "amount", "date",  "code", "name",
            "person",   "visit",   "branch", "ledger", "status", "type",   "value", "city", "region",
            "balance",  "currency", "note",  "id",     "start",  "end",    "total", "unit", "batch"};
        return pick(words);
    }

    // Identifier of 1-3 words joined by '_' or camel case.
    std::string identifier() {
        const int n = uniform(1, 3);
        const bool camel = coin(0.3);
        std::string out;
        for (int i = 0; i < n; ++i) {
            std::string w = word();
            if (camel && i > 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
            if (!camel && i > 0) out += '_';
            out += w;
        }
        return out;
    }

    std::string sentence() {
        std::string out;
        const int n = uniform(0, 6);
        for (int i = 0; i < n; ++i) out += (i ? " " : "") + word();
        return out;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Random valid schema document. Every table has a PK in column 0; FKs point
// at other tables' PKs. With `pk_fk` set, PK columns may themselves be FKs,
// which produces multi-hop chains and reference cycles.
inline Json random_schema_doc(Gen& g, const std::string& name, int tables, int max_cols, double fk_rate,
                              bool pk_fk = false) {
    Json doc{{"name", name}, {"tables", Json::array()}};
    std::vector<std::string> table_names;
    for (int t = 0; t < tables; ++t) table_names.push_back(g.identifier() + "_t" + std::to_string(t));
    std::vector<std::string> pk_names;
    for (int t = 0; t < tables; ++t) pk_names.push_back("pk" + std::to_string(t));

    for (int t = 0; t < tables; ++t) {
        Json cols = Json::array();
        cols.push_back({{"name", pk_names[t]}, {"type", "int"}, {"primary_key", true}});
        const int n = g.uniform(1, std::max(1, max_cols - 1));
        for (int c = 0; c < n; ++c) {
            Json col{{"name", g.identifier() + "_" + std::to_string(c)}};
            if (g.coin()) col["type"] = g.pick(std::vector<std::string>{"int", "text", "date", "numeric"});
            if (g.coin()) col["description"] = g.sentence();
            cols.push_back(std::move(col));
        }
        Json fks = Json::array();
        if (tables > 1) {
            for (std::size_t c = 1; c < cols.size(); ++c) {
                if (!g.coin(fk_rate)) continue;
                int ref = g.uniform(0, tables - 1);
                if (ref == t) ref = (ref + 1) % tables;
                fks.push_back({{"column", cols[c]["name"]}, {"ref_table", table_names[ref]}, {"ref_column", pk_names[ref]}});
            }
            if (pk_fk && g.coin(fk_rate)) {
                int ref = g.uniform(0, tables - 1);
                if (ref == t) ref = (ref + 1) % tables;
                fks.push_back({{"column", pk_names[t]}, {"ref_table", table_names[ref]}, {"ref_column", pk_names[ref]}});
            }
        }
        Json table{{"name", table_names[t]}, {"columns", std::move(cols)}, {"foreign_keys", std::move(fks)}};
        if (g.coin()) table["description"] = g.sentence();
        doc["tables"].push_back(std::move(table));
    }
    return doc;
}

inline schemamatch::Schema random_schema(Gen& g, const std::string& name, int tables, int max_cols, double fk_rate,
                                         bool pk_fk = false) {
    return schemamatch::load_schema(random_schema_doc(g, name, tables, max_cols, fk_rate, pk_fk));
}

// Every column of `s` as a reference, in schema order.
inline std::vector<schemamatch::ColumnRef> all_columns(const schemamatch::Schema& s) {
    std::vector<schemamatch::ColumnRef> out;
    for (const auto& t : s.tables)
        for (const auto& c : t.columns) out.push_back({t.name, c.name});
    return out;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace support
