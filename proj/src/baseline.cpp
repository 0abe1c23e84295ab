#include "schemamatch/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

namespace {

struct FlatColumn {
    const Table* table;
    const Column* column;
};

std::vector<FlatColumn> flatten(const Schema& s) {
    std::vector<FlatColumn> out;
    for (const auto& t : s.tables)
        for (const auto& c : t.columns) out.push_back({&t, &c});
    return out;
}

std::vector<ColumnRef> refs(const std::vector<FlatColumn>& cols) {
    std::vector<ColumnRef> out;
    out.reserve(cols.size());
    for (const auto& fc : cols) out.push_back({fc.table->name, fc.column->name});
    return out;
}

}  // namespace

double name_similarity(std::string_view a, std::string_view b) {
    const std::string na = normalize_name(a);
    const std::string nb = normalize_name(b);
    if (na == nb) return 1.0;
    const auto ca = trigram_counts(na);
    const auto cb = trigram_counts(nb);
    long inter = 0;
    long uni = 0;
    auto ia = ca.begin();
    auto ib = cb.begin();
    while (ia != ca.end() || ib != cb.end()) {
        if (ib == cb.end() || (ia != ca.end() && ia->first < ib->first)) {
            uni += ia->second;
            ++ia;
        } else if (ia == ca.end() || ib->first < ia->first) {
            uni += ib->second;
            ++ib;
        } else {
            inter += std::min(ia->second, ib->second);
            uni += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    const double j = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    // Distinct strings can share a trigram multiset ("abab" / "baba").
    return j >= 1.0 ? std::nextafter(1.0, 0.0) : j;
}

ScoreMatrix::ScoreMatrix(std::vector<ColumnRef> sources, std::vector<ColumnRef> targets)
    : sources_(std::move(sources)), targets_(std::move(targets)), values_(sources_.size() * targets_.size(), 0.0) {}

ScoreMatrix empty_scores(const Schema& source, const Schema& target) {
    return ScoreMatrix(refs(flatten(source)), refs(flatten(target)));
}

MatchSet select_argmax(const ScoreMatrix& scores, double threshold) {
    MatchSet out;
    const auto& targets = scores.targets();
    std::vector<std::string> keys;
    keys.reserve(targets.size());
    for (const auto& t : targets) keys.push_back(t.key());

    for (std::size_t i = 0; i < scores.sources().size(); ++i) {
        if (targets.empty()) break;
        std::size_t best = 0;
        for (std::size_t j = 1; j < targets.size(); ++j) {
            const double s = scores.at(i, j);
            const double b = scores.at(i, best);
            if (s > b + kScoreTieTolerance || (std::abs(s - b) <= kScoreTieTolerance && keys[j] < keys[best]))
                best = j;
        }
        const double score = scores.at(i, best);
        if (score >= threshold) {
            out.insert({scores.sources()[i], targets[best], Stage::baseline, std::clamp(score, 0.0, 1.0)});
        }
    }
    return out;
}

ScoreMatrix lexical_scores(const Schema& source, const Schema& target) {
    ScoreMatrix m = empty_scores(source, target);
    for (std::size_t i = 0; i < m.sources().size(); ++i)
        for (std::size_t j = 0; j < m.targets().size(); ++j)
            m.at(i, j) = name_similarity(m.sources()[i].display(), m.targets()[j].display());
    return m;
}

MatchSet lexical_match(const Schema& source, const Schema& target, double threshold) {
    return select_argmax(lexical_scores(source, target), threshold);
}

Pcg build_pcg(const Schema& source, const Schema& target) {
    Pcg g;
    const auto src = flatten(source);
    const auto tgt = flatten(target);
    g.table_pairs = source.tables.size() * target.tables.size();
    g.source_columns = src.size();
    g.target_columns = tgt.size();

    for (const auto& ts : source.tables)
        for (const auto& tt : target.tables)
            g.nodes.push_back({{ts.name, std::nullopt}, {tt.name, std::nullopt}, name_similarity(ts.name, tt.name), 0.0});
    for (const auto& cs : src)
        for (const auto& ct : tgt)
            g.nodes.push_back({{cs.table->name, cs.column->name},
                               {ct.table->name, ct.column->name},
                               name_similarity(cs.column->name, ct.column->name),
                               0.0});

    // Global column index lookup by (table key, column key).
    auto index_of = [](const std::vector<FlatColumn>& cols) {
        std::map<std::pair<std::string, std::string>, std::size_t> idx;
        for (std::size_t i = 0; i < cols.size(); ++i)
            idx[{ident_key(cols[i].table->name), ident_key(cols[i].column->name)}] = i;
        return idx;
    };
    const auto src_idx = index_of(src);
    const auto tgt_idx = index_of(tgt);
    auto col = [](const auto& idx, std::string_view t, std::string_view c) {
        return idx.at({ident_key(t), ident_key(c)});
    };

    std::size_t first_col = 0;
    std::vector<std::size_t> src_offsets;
    for (const auto& t : source.tables) {
        src_offsets.push_back(first_col);
        first_col += t.columns.size();
    }
    std::vector<std::size_t> tgt_offsets;
    first_col = 0;
    for (const auto& t : target.tables) {
        tgt_offsets.push_back(first_col);
        first_col += t.columns.size();
    }

    for (std::size_t si = 0; si < source.tables.size(); ++si) {
        for (std::size_t ti = 0; ti < target.tables.size(); ++ti) {
            const std::size_t tp = si * target.tables.size() + ti;
            for (std::size_t a = 0; a < source.tables[si].columns.size(); ++a) {
                for (std::size_t b = 0; b < target.tables[ti].columns.size(); ++b) {
                    const std::size_t cp = g.column_node(src_offsets[si] + a, tgt_offsets[ti] + b);
                    g.edges.push_back({tp, cp, PcgLabel::column_of, 0.0});
                    g.edges.push_back({cp, tp, PcgLabel::column_of, 0.0});
                }
            }
        }
    }
    for (const auto& ts : source.tables) {
        for (const auto& fs : ts.foreign_keys) {
            for (const auto& tt : target.tables) {
                for (const auto& ft : tt.foreign_keys) {
                    const std::size_t a =
                        g.column_node(col(src_idx, ts.name, fs.column), col(tgt_idx, tt.name, ft.column));
                    const std::size_t b = g.column_node(col(src_idx, fs.ref_table, fs.ref_column),
                                                        col(tgt_idx, ft.ref_table, ft.ref_column));
                    g.edges.push_back({a, b, PcgLabel::fk, 0.0});
                    g.edges.push_back({b, a, PcgLabel::fk, 0.0});
                }
            }
        }
    }

    std::vector<std::size_t> out_col(g.nodes.size(), 0);
    std::vector<std::size_t> out_fk(g.nodes.size(), 0);
    for (const auto& e : g.edges) ++(e.label == PcgLabel::column_of ? out_col : out_fk)[e.from];
    for (auto& e : g.edges)
        e.weight = 1.0 / static_cast<double>((e.label == PcgLabel::column_of ? out_col : out_fk)[e.from]);
    return g;
}

void FloodConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("flood.epsilon must be > 0");
    if (max_iters == 0) throw ConfigError("flood.max_iters must be >= 1");
    if (!(select_threshold >= 0.0 && select_threshold <= 1.0))
        throw ConfigError("flood.threshold must lie in [0,1]");
}

FloodStats propagate(Pcg& graph, const FloodConfig& cfg) {
    cfg.validate();
    auto& nodes = graph.nodes;
    const std::size_t n = nodes.size();

    double max0 = 0.0;
    for (const auto& node : nodes) max0 = std::max(max0, node.sigma0);
    std::vector<double> base(n, 0.0);
    if (max0 > 0.0)
        for (std::size_t p = 0; p < n; ++p) base[p] = nodes[p].sigma0 / max0;

    std::vector<double> sigma = base;
    std::vector<double> next(n);
    FloodStats stats;
    while (stats.iterations < cfg.max_iters) {
        for (std::size_t p = 0; p < n; ++p) next[p] = base[p] + sigma[p];
        // Edge order is fixed, so the reduction is reproducible.
        for (const auto& e : graph.edges) next[e.to] += sigma[e.from] * e.weight;
        double max = 0.0;
        for (double v : next) max = std::max(max, v);
        if (max > 0.0)
            for (double& v : next) v /= max;
        double delta = 0.0;
        for (std::size_t p = 0; p < n; ++p) delta = std::max(delta, std::abs(next[p] - sigma[p]));
        sigma.swap(next);
        ++stats.iterations;
        if (delta < cfg.epsilon) {
            stats.converged = true;
            break;
        }
    }
    for (std::size_t p = 0; p < n; ++p) nodes[p].sigma = sigma[p];
    return stats;
}

ScoreMatrix flood_scores(const Pcg& graph, const Schema& source, const Schema& target) {
    ScoreMatrix m = empty_scores(source, target);
    for (std::size_t i = 0; i < m.sources().size(); ++i)
        for (std::size_t j = 0; j < m.targets().size(); ++j) m.at(i, j) = graph.nodes[graph.column_node(i, j)].sigma;
    return m;
}

FloodResult similarity_flood(const Schema& source, const Schema& target, const FloodConfig& cfg) {
    Pcg graph = build_pcg(source, target);
    const FloodStats stats = propagate(graph, cfg);
    ScoreMatrix scores = flood_scores(graph, source, target);
    MatchSet matches = select_argmax(scores, cfg.select_threshold);
    return {std::move(matches), std::move(scores), stats};
}

MatchSet similarity_flood_match(const Schema& source, const Schema& target, const FloodConfig& cfg) {
    return similarity_flood(source, target, cfg).matches;
}

void CupidConfig::validate() const {
    if (!(w_struct >= 0.0 && w_struct <= 1.0)) throw ConfigError("cupid.w_struct must lie in [0,1]");
    if (!std::isfinite(select_threshold)) throw ConfigError("cupid.threshold must be finite");
}

ScoreMatrix cupid_scores(const Schema& source, const Schema& target, const CupidConfig& cfg) {
    cfg.validate();
    const auto src = flatten(source);
    const auto tgt = flatten(target);
    ScoreMatrix m(refs(src), refs(tgt));
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto& s = src[i];
        const std::string s_text = s.column->name + " " + s.column->description;
        const bool s_fk = s.table->is_foreign_key(s.column->name);
        for (std::size_t j = 0; j < tgt.size(); ++j) {
            const auto& t = tgt[j];
            const double lsim = name_similarity(s_text, t.column->name + " " + t.column->description);
            double ssim = name_similarity(s.table->name, t.table->name);
            const bool both_pk = s.column->is_primary_key && t.column->is_primary_key;
            const bool both_fk = s_fk && t.table->is_foreign_key(t.column->name);
            if (both_pk || both_fk) ssim = std::min(1.0, ssim + 0.2);
            m.at(i, j) = cfg.w_struct * ssim + (1.0 - cfg.w_struct) * lsim;
        }
    }
    return m;
}

MatchSet cupid_match(const Schema& source, const Schema& target, const CupidConfig& cfg) {
    return select_argmax(cupid_scores(source, target, cfg), cfg.select_threshold);
}

MatcherId parse_matcher_id(std::string_view id) {
    const std::string key = ident_key(id);
    if (key == "lexical") return MatcherId::lexical;
    if (key == "flood") return MatcherId::flood;
    if (key == "cupid") return MatcherId::cupid;
    throw ConfigError("unknown matcher id '" + std::string(id) + "' (expected lexical, flood, cupid)");
}

const char* to_string(MatcherId id) {
    switch (id) {
        case MatcherId::lexical: return "lexical";
        case MatcherId::flood: return "flood";
        case MatcherId::cupid: return "cupid";
    }
    return "lexical";
}

ScoreMatrix composite_scores(const Schema& source, const Schema& target, std::span<const MatcherId> members,
                             const CompositeConfig& cfg) {
    if (members.empty()) throw ConfigError("composite matcher needs at least one member");
    ScoreMatrix sum = empty_scores(source, target);
    for (MatcherId id : members) {
        ScoreMatrix part = [&] {
            switch (id) {
                case MatcherId::lexical: return lexical_scores(source, target);
                case MatcherId::flood: return similarity_flood(source, target, cfg.flood).scores;
                case MatcherId::cupid: return cupid_scores(source, target, cfg.cupid);
            }
            return lexical_scores(source, target);
        }();
        for (std::size_t i = 0; i < sum.sources().size(); ++i)
            for (std::size_t j = 0; j < sum.targets().size(); ++j) sum.at(i, j) += part.at(i, j);
    }
    const double n = static_cast<double>(members.size());
    for (std::size_t i = 0; i < sum.sources().size(); ++i)
        for (std::size_t j = 0; j < sum.targets().size(); ++j) sum.at(i, j) /= n;
    return sum;
}

MatchSet composite_match(const Schema& source, const Schema& target, std::span<const std::string> members,
                         double threshold, const CompositeConfig& cfg) {
    std::vector<MatcherId> ids;
    for (const auto& m : members) ids.push_back(parse_matcher_id(m));
    return select_argmax(composite_scores(source, target, ids, cfg), threshold);
}

}  // namespace schemamatch
