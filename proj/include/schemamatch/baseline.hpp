#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemamatch/schema.hpp"

namespace schemamatch {

// Jaccard similarity of character-trigram multisets over normalize_name()
// forms. Exactly 1.0 iff the normalized forms are equal.
double name_similarity(std::string_view a, std::string_view b);

// Dense source-column x target-column score table, both axes in schema order.
class ScoreMatrix {
public:
    ScoreMatrix(std::vector<ColumnRef> sources, std::vector<ColumnRef> targets);

    double& at(std::size_t row, std::size_t col) { return values_[row * targets_.size() + col]; }
    double at(std::size_t row, std::size_t col) const { return values_[row * targets_.size() + col]; }
    const std::vector<ColumnRef>& sources() const { return sources_; }
    const std::vector<ColumnRef>& targets() const { return targets_; }

private:
    std::vector<ColumnRef> sources_;
    std::vector<ColumnRef> targets_;
    std::vector<double> values_;
};

ScoreMatrix empty_scores(const Schema& source, const Schema& target);

// Scores closer than this are ties; ties go to the lexicographically smaller
// target "table.column" key.
inline constexpr double kScoreTieTolerance = 1e-12;

// Per source column: the best target column, kept iff its score >= threshold.
MatchSet select_argmax(const ScoreMatrix& scores, double threshold);

ScoreMatrix lexical_scores(const Schema& source, const Schema& target);
MatchSet lexical_match(const Schema& source, const Schema& target, double threshold);

// --- Similarity flooding -------------------------------------------------

// A table when `column` is empty, otherwise a column of `table`.
struct PcgElement {
    std::string table;
    std::optional<std::string> column;
};

struct PcgNode {
    PcgElement source_elem;
    PcgElement target_elem;
    double sigma0 = 0.0;
    double sigma = 0.0;
};

enum class PcgLabel { column_of, fk };

struct PcgEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    PcgLabel label = PcgLabel::column_of;
    double weight = 1.0;
};

// Pairwise connectivity graph. Table-pair nodes come first; column-pair
// node for (source col i, target col j) lives at column_node(i, j).
struct Pcg {
    std::vector<PcgNode> nodes;
    std::vector<PcgEdge> edges;
    std::size_t table_pairs = 0;
    std::size_t source_columns = 0;
    std::size_t target_columns = 0;

    std::size_t column_node(std::size_t source_col, std::size_t target_col) const {
        return table_pairs + source_col * target_columns + target_col;
    }
};

Pcg build_pcg(const Schema& source, const Schema& target);

struct FloodConfig {
    double epsilon = 1e-4;
    std::size_t max_iters = 100;
    double select_threshold = 0.3;

    void validate() const;
};

struct FloodStats {
    std::size_t iterations = 0;
    bool converged = false;
};

// Runs the fixed-point iteration in place on graph.nodes[*].sigma, seeded
// from sigma0 rescaled to max 1.
FloodStats propagate(Pcg& graph, const FloodConfig& cfg);

struct FloodResult {
    MatchSet matches;
    ScoreMatrix scores;
    FloodStats stats;
};

FloodResult similarity_flood(const Schema& source, const Schema& target, const FloodConfig& cfg);
MatchSet similarity_flood_match(const Schema& source, const Schema& target, const FloodConfig& cfg);

// Column-pair sigmas of an already propagated graph, laid out like the schemas.
ScoreMatrix flood_scores(const Pcg& graph, const Schema& source, const Schema& target);

// --- Cupid-style ----------------------------------------------------------

struct CupidConfig {
    double w_struct = 0.5;
    double select_threshold = 0.5;

    void validate() const;
};

ScoreMatrix cupid_scores(const Schema& source, const Schema& target, const CupidConfig& cfg);
MatchSet cupid_match(const Schema& source, const Schema& target, const CupidConfig& cfg);

// --- Composite ------------------------------------------------------------

enum class MatcherId { lexical, flood, cupid };

// Throws ConfigError on an unknown id.
MatcherId parse_matcher_id(std::string_view id);
const char* to_string(MatcherId id);

struct CompositeConfig {
    FloodConfig flood;
    CupidConfig cupid;
};

// Mean of the members' pre-selection score matrices, then argmax selection.
ScoreMatrix composite_scores(const Schema& source, const Schema& target, std::span<const MatcherId> members,
                             const CompositeConfig& cfg = {});
MatchSet composite_match(const Schema& source, const Schema& target, std::span<const std::string> members,
                         double threshold, const CompositeConfig& cfg = {});

}  // namespace schemamatch
