#include <boltrack/predecessor_index.hpp>

#include <boltrack/rescore.hpp>

#include <algorithm>
#include <cmath>

namespace boltrack {

namespace {

// Absorbs rounding differences between a bound and the exact value it bounds.
double slack(double magnitude) {
    return 1e-9 * (1.0 + std::abs(magnitude));
}

double interval_gap(double v, double lo, double hi) {
    if (v < lo) {
        return lo - v;
    }
    if (v > hi) {
        return v - hi;
    }
    return 0.0;
}

}  // namespace

PredecessorIndex::PredecessorIndex(const Hyperparams& params, double cell_size)
    : params_(params), cell_size_(cell_size) {}

void PredecessorIndex::insert(const Tracklet& tracklet, double hypothesis_score) {
    const BoundingBox& last = tracklet.last().box;
    const Point c = last.center();
    const auto key = std::make_pair(static_cast<std::int64_t>(std::floor(c.x / cell_size_)),
                                    static_cast<std::int64_t>(std::floor(c.y / cell_size_)));
    auto [it, inserted] = cell_lookup_.try_emplace(key, cells_.size());
    if (inserted) {
        cells_.push_back(Cell{key.first, key.second, {}, tracklet.length(), tracklet.length(), 0.0, 0.0});
    }
    Cell& cell = cells_[it->second];
    cell.members.insert(Member{hypothesis_score, tracklet.id, tracklet.length(), tracklet.end(), last});
    cell.min_length = std::min(cell.min_length, tracklet.length());
    cell.max_length = std::max(cell.max_length, tracklet.length());
    cell.max_half_w = std::max(cell.max_half_w, last.w() / 2.0);
    cell.max_half_h = std::max(cell.max_half_h, last.h() / 2.0);
    ++count_;
}

PredecessorChoice PredecessorIndex::best(const BoundingBox& head, int start_frame) const {
    PredecessorChoice choice;
    if (cells_.empty()) {
        return choice;
    }
    const Point q = head.center();
    const double q_hw = head.w() / 2.0;
    const double q_hh = head.h() / 2.0;
    const bool weighted = params_.boundary_length_weighting;

    struct CellBound {
        double bound;
        double multiplier;  // w_bnd * (length factor) * k, to be added to a member score
        const Cell* cell;
    };
    std::vector<CellBound> order;
    order.reserve(cells_.size());
    for (const Cell& cell : cells_) {
        const double x0 = static_cast<double>(cell.cx) * cell_size_;
        const double y0 = static_cast<double>(cell.cy) * cell_size_;
        const double dx = interval_gap(q.x, x0, x0 + cell_size_);
        const double dy = interval_gap(q.y, y0, y0 + cell_size_);
        const bool may_overlap = dx < q_hw + cell.max_half_w && dy < q_hh + cell.max_half_h;
        // Upper bound of the per-link boundary value over every member of the cell.
        const double k =
            (may_overlap ? params_.w_iou : 0.0) - params_.alpha_bnd - params_.w_loc * std::hypot(dx, dy);
        double length_factor = 1.0;
        if (weighted) {
            length_factor = static_cast<double>(k >= 0.0 ? cell.max_length : cell.min_length);
        }
        const double multiplier = params_.w_bnd * length_factor * k;
        order.push_back({cell.members.begin()->score + multiplier, multiplier, &cell});
    }
    std::sort(order.begin(), order.end(), [](const CellBound& a, const CellBound& b) {
        if (a.bound != b.bound) {
            return a.bound > b.bound;
        }
        return a.cell->members.begin()->id < b.cell->members.begin()->id;
    });

    const int horizon = params_.predecessor_horizon;
    for (const CellBound& cb : order) {
        if (cb.bound + slack(std::abs(cb.bound - cb.multiplier) + std::abs(cb.multiplier)) < choice.value) {
            break;
        }
        for (const Member& m : cb.cell->members) {
            const double bound = m.score + cb.multiplier;
            if (bound + slack(std::abs(m.score) + std::abs(cb.multiplier)) < choice.value) {
                break;
            }
            if (m.end >= start_frame || (horizon > 0 && start_frame - m.end > horizon)) {
                continue;
            }
            const double v = m.score + params_.w_bnd * boundary_term(m.length, m.last, head, params_);
            const bool better =
                v > choice.value || (v == choice.value && choice.tracklet && m.id < *choice.tracklet);
            if (better) {
                choice.tracklet = m.id;
                choice.value = v;
            }
        }
    }
    return choice;
}

}  // namespace boltrack
