#pragma once

#include <boltrack/model.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace boltrack {

struct PredecessorChoice {
    std::optional<int> tracklet;  // none: the hypothesis starts with the new tracklet
    double value = 0.0;           // hypothesis score before the new tracklet's own contributions
};

/// Exact arg-max over closed tracklets of
///     score(p) + w_bnd * boundary_term(length(p), last(p), head)
/// with "no predecessor" valued 0.
///
/// Candidates are bucketed by the center of their tail box on a square grid.
/// Each cell keeps its members ordered by hypothesis score together with the
/// extremes needed to bound the boundary term (length range, largest half
/// extents). Cells and members are visited in bound order and the scan stops
/// once no remaining bound can reach the incumbent, so the result is identical
/// to a linear scan. Requires w_bnd, w_iou, w_loc >= 0.
class PredecessorIndex {
public:
    explicit PredecessorIndex(const Hyperparams& params, double cell_size = 64.0);

    /// Registers a closed tracklet with its final best-hypothesis score.
    void insert(const Tracklet& tracklet, double hypothesis_score);

    /// Best predecessor for a tracklet starting at start_frame with head box head.
    /// Ties prefer no predecessor, then the lower tracklet id.
    PredecessorChoice best(const BoundingBox& head, int start_frame) const;

    std::size_t size() const { return count_; }

private:
    struct Member {
        double score;
        int id;
        int length;
        int end;
        BoundingBox last;
    };
    struct ByScore {
        bool operator()(const Member& a, const Member& b) const {
            if (a.score != b.score) {
                return a.score > b.score;
            }
            return a.id < b.id;
        }
    };
    struct Cell {
        std::int64_t cx;
        std::int64_t cy;
        std::multiset<Member, ByScore> members;
        int min_length = 0;
        int max_length = 0;
        double max_half_w = 0.0;
        double max_half_h = 0.0;
    };

    Hyperparams params_;
    double cell_size_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> cell_lookup_;
    std::vector<Cell> cells_;
    std::size_t count_ = 0;
};

}  // namespace boltrack
