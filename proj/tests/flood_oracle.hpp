#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "schemamatch/baseline.hpp"
#include "schemamatch/text.hpp"

namespace support {

using namespace schemamatch;

// Two tables of two columns per side with one FK each.
inline Schema two_by_two(bool target) {
    if (!target)
        return schemamatch::load_schema({{"name", "src"},
                          {"tables",
                           {{{"name", "orders"},
                             {"columns", {{{"name", "order_id"}, {"primary_key", true}}, {{"name", "customer_id"}}}},
                             {"foreign_keys", {{{"column", "customer_id"}, {"ref_table", "customers"}, {"ref_column", "customer_id"}}}}},
                            {{"name", "customers"},
                             {"columns", {{{"name", "customer_id"}, {"primary_key", true}}, {{"name", "name"}}}}}}}});
    return schemamatch::load_schema({{"name", "tgt"},
                      {"tables",
                       {{{"name", "purchase"},
                         {"columns", {{{"name", "purchase_id"}, {"primary_key", true}}, {{"name", "client_id"}}}},
                         {"foreign_keys", {{{"column", "client_id"}, {"ref_table", "client"}, {"ref_column", "client_id"}}}}},
                        {{"name", "client"},
                         {"columns", {{{"name", "client_id"}, {"primary_key", true}}, {{"name", "client_name"}}}}}}}});
}

// Independent dense iteration: nodes keyed by strings, adjacency as a full
// matrix, weights counted per (from, label).
struct DenseOracle {
    std::vector<std::string> keys;
    std::map<std::string, std::size_t> index;
    std::vector<double> sigma0;
    std::vector<std::vector<double>> in;  // in[to][from]
    std::size_t iterations = 0;

    DenseOracle(const Schema& s, const Schema& t) {
        for (const auto& a : s.tables)
            for (const auto& b : t.tables) add("T|" + ident_key(a.name) + "|" + ident_key(b.name), name_similarity(a.name, b.name));
        for (const auto& a : s.tables)
            for (const auto& ca : a.columns)
                for (const auto& b : t.tables)
                    for (const auto& cb : b.columns) add(col_key(a.name, ca.name, b.name, cb.name), name_similarity(ca.name, cb.name));
        const std::size_t n = keys.size();
        std::vector<std::tuple<std::size_t, std::size_t, int>> edges;
        for (const auto& a : s.tables)
            for (const auto& b : t.tables) {
                const std::size_t tp = index.at("T|" + ident_key(a.name) + "|" + ident_key(b.name));
                for (const auto& ca : a.columns)
                    for (const auto& cb : b.columns) {
                        const std::size_t cp = index.at(col_key(a.name, ca.name, b.name, cb.name));
                        edges.emplace_back(tp, cp, 0);
                        edges.emplace_back(cp, tp, 0);
                    }
            }
        for (const auto& a : s.tables)
            for (const auto& fa : a.foreign_keys)
                for (const auto& b : t.tables)
                    for (const auto& fb : b.foreign_keys) {
                        const std::size_t x = index.at(col_key(a.name, fa.column, b.name, fb.column));
                        const std::size_t y = index.at(col_key(fa.ref_table, fa.ref_column, fb.ref_table, fb.ref_column));
                        edges.emplace_back(x, y, 1);
                        edges.emplace_back(y, x, 1);
                    }
        std::map<std::pair<std::size_t, int>, int> out;
        for (const auto& [f, _, l] : edges) ++out[{f, l}];
        in.assign(n, std::vector<double>(n, 0.0));
        for (const auto& [f, to, l] : edges) in[to][f] += 1.0 / out[{f, l}];
    }

    static std::string col_key(std::string_view st, std::string_view sc, std::string_view tt, std::string_view tc) {
        return "C|" + ident_key(st) + "." + ident_key(sc) + "|" + ident_key(tt) + "." + ident_key(tc);
    }

    void add(std::string key, double s0) {
        index[key] = keys.size();
        keys.push_back(std::move(key));
        sigma0.push_back(s0);
    }

    std::vector<double> run(double eps, std::size_t max_iters) {
        const std::size_t n = keys.size();
        const double m0 = *std::max_element(sigma0.begin(), sigma0.end());
        std::vector<double> base(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) base[i] = m0 > 0 ? sigma0[i] / m0 : 0.0;
        std::vector<double> s = base;
        iterations = 0;
        while (iterations < max_iters) {
            std::vector<double> next(n);
            for (std::size_t p = 0; p < n; ++p) {
                double acc = base[p] + s[p];
                for (std::size_t q = 0; q < n; ++q) acc += in[p][q] * s[q];
                next[p] = acc;
            }
            const double m = *std::max_element(next.begin(), next.end());
            if (m > 0)
                for (double& v : next) v /= m;
            double delta = 0.0;
            for (std::size_t p = 0; p < n; ++p) delta = std::max(delta, std::abs(next[p] - s[p]));
            s = next;
            ++iterations;
            if (delta < eps) break;
        }
        return s;
    }
};

inline std::string pcg_key(const PcgNode& n) {
    if (!n.source_elem.column) return "T|" + ident_key(n.source_elem.table) + "|" + ident_key(n.target_elem.table);
    return DenseOracle::col_key(n.source_elem.table, *n.source_elem.column, n.target_elem.table, *n.target_elem.column);
}

}  // namespace support
