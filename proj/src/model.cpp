#include <boltrack/model.hpp>

#include <boltrack/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace boltrack {

void check_tracklet(const Tracklet& tracklet, double join_threshold) {
    if (tracklet.detections.empty()) {
        throw StructuralError("tracklet " + std::to_string(tracklet.id) + " is empty");
    }
    for (std::size_t i = 1; i < tracklet.detections.size(); ++i) {
        const Detection& prev = tracklet.detections[i - 1];
        const Detection& cur = tracklet.detections[i];
        if (cur.frame != prev.frame + 1) {
            throw StructuralError("tracklet " + std::to_string(tracklet.id) + " has a gap at frame " +
                                  std::to_string(prev.frame + 1));
        }
        if (iou(prev.box, cur.box) < join_threshold) {
            throw StructuralError("tracklet " + std::to_string(tracklet.id) + " violates the IoU gate at frame " +
                                  std::to_string(cur.frame));
        }
    }
}

void Hyperparams::validate() const {
    auto require_finite = [](double v, const char* name) {
        if (!std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be finite");
        }
    };
    auto require_nonneg = [&](double v, const char* name) {
        require_finite(v, name);
        if (v < 0.0) {
            throw ConfigError(std::string(name) + " must be >= 0");
        }
    };
    require_nonneg(w_ff, "w_ff");
    require_finite(alpha_ff, "alpha_ff");
    require_nonneg(w_bnd, "w_bnd");
    require_nonneg(w_iou, "w_iou");
    require_nonneg(w_loc, "w_loc");
    require_finite(alpha_bnd, "alpha_bnd");
    require_nonneg(fallback_gap_penalty, "fallback_gap_penalty");
    if (!(join_threshold > 0.0 && join_threshold <= 1.0)) {
        throw ConfigError("join_threshold must be in (0, 1]");
    }
    if (max_detections < 1) {
        throw ConfigError("max_detections must be >= 1");
    }
    if (anchor_score) {
        require_finite(*anchor_score, "anchor_score");
    }
    if (predecessor_horizon < 0) {
        throw ConfigError("predecessor_horizon must be >= 0 (0 = unlimited)");
    }
}

Sequence Sequence::prefix(int n) const {
    if (n < 1 || n > size()) {
        throw StructuralError("prefix length " + std::to_string(n) + " out of range");
    }
    return Sequence({frames_.begin(), frames_.begin() + n}, first_frame_box_, anchor_score_);
}

namespace {

void cap_frame(std::vector<Detection>& dets, std::size_t cap) {
    if (dets.size() <= cap) {
        return;
    }
    std::vector<Detection> ranked = dets;
    std::stable_sort(ranked.begin(), ranked.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.id < b.id;
    });
    ranked.resize(cap);
    // Keep the survivors in their original order.
    std::sort(ranked.begin(), ranked.end(), [](const Detection& a, const Detection& b) { return a.id < b.id; });
    dets = std::move(ranked);
}

}  // namespace

Sequence validate_sequence(std::vector<FrameDetections> frames, const BoundingBox& first_frame_box,
                           const Hyperparams& params) {
    params.validate();
    if (frames.empty()) {
        throw StructuralError("sequence has no frames");
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const FrameDetections& f = frames[t];
        if (f.frame != static_cast<int>(t)) {
            throw StructuralError("frame indices must be contiguous from 0: expected " + std::to_string(t) +
                                  ", got " + std::to_string(f.frame));
        }
        std::vector<int> ids;
        ids.reserve(f.detections.size());
        for (const Detection& d : f.detections) {
            if (d.frame != f.frame) {
                throw StructuralError("detection carries frame " + std::to_string(d.frame) + " inside frame " +
                                      std::to_string(f.frame));
            }
            if (!std::isfinite(d.score)) {
                throw StructuralError("non-finite detection score at frame " + std::to_string(f.frame));
            }
            ids.push_back(d.id);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw StructuralError("duplicate detection id in frame " + std::to_string(f.frame));
        }
    }

    const auto cap = static_cast<std::size_t>(params.max_detections);
    for (std::size_t t = 1; t < frames.size(); ++t) {
        cap_frame(frames[t].detections, cap);
    }

    std::vector<Detection>& first = frames[0].detections;
    double anchor_score = 1.0;
    if (params.anchor_score) {
        anchor_score = *params.anchor_score;
    } else if (!first.empty()) {
        anchor_score = std::max_element(first.begin(), first.end(), [](const Detection& a, const Detection& b) {
                           return a.score < b.score;
                       })->score;
    }
    cap_frame(first, cap - 1);
    std::vector<Detection> with_anchor;
    with_anchor.reserve(first.size() + 1);
    with_anchor.push_back(Detection{0, first_frame_box, anchor_score, 0});
    for (const Detection& d : first) {
        with_anchor.push_back(Detection{0, d.box, d.score, static_cast<int>(with_anchor.size())});
    }
    first = std::move(with_anchor);

    return Sequence(std::move(frames), first_frame_box, anchor_score);
}

}  // namespace boltrack
