#include <boltrack/rescore.hpp>

#include <boltrack/errors.hpp>

#include <algorithm>
#include <string>

namespace boltrack {

double detection_contribution(const Detection& d, const BoundingBox& b_ff, const Hyperparams& params) {
    return d.score + params.w_ff * ff_score(b_ff, d.box, params.alpha_ff);
}

double tracklet_score(const Tracklet& t, const BoundingBox& b_ff, const Hyperparams& params) {
    double total = 0.0;
    for (const Detection& d : t.detections) {
        total += detection_contribution(d, b_ff, params);
    }
    return total;
}

double boundary_term(int prev_length, const BoundingBox& prev_last, const BoundingBox& next_first,
                     const Hyperparams& params) {
    const double link = params.w_iou * iou(prev_last, next_first) -
                        params.w_loc * center_distance(prev_last, next_first) - params.alpha_bnd;
    if (!params.boundary_length_weighting) {
        return link;
    }
    return static_cast<double>(prev_length) * link;
}

double boundary_score(const Tracklet& prev, const Tracklet& next, const Hyperparams& params) {
    if (prev.end() >= next.start()) {
        throw StructuralError("boundary between tracklets " + std::to_string(prev.id) + " and " +
                              std::to_string(next.id) + " requires the first to end before the second starts");
    }
    return boundary_term(prev.length(), prev.last().box, next.first().box, params);
}

double hypothesis_score(std::span<const Tracklet* const> chain, const BoundingBox& b_ff, const Hyperparams& params) {
    if (chain.empty()) {
        throw StructuralError("empty track hypothesis");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (i > 0) {
            total = total + params.w_bnd * boundary_score(*chain[i - 1], *chain[i], params);
        }
        for (const Detection& d : chain[i]->detections) {
            total += detection_contribution(d, b_ff, params);
        }
    }
    return total;
}

DpState::DpState(const Hyperparams& params, const BoundingBox& b_ff)
    : index_(params, std::max(16.0, std::max(b_ff.w(), b_ff.h()))) {}

TrackHypothesis DpState::hypothesis(int tracklet_id, const TrackletStore& store) const {
    TrackHypothesis h;
    h.score = node(tracklet_id).score;
    h.last_frame = store.tracklet(tracklet_id).end();
    std::optional<int> cur = tracklet_id;
    while (cur) {
        h.tracklets.push_back(*cur);
        cur = node(*cur).predecessor;
    }
    std::reverse(h.tracklets.begin(), h.tracklets.end());
    return h;
}

namespace {

bool outranks(const DpState& state, int candidate, std::optional<int> incumbent) {
    if (!incumbent) {
        return true;
    }
    const double a = state.node(candidate).score;
    const double b = state.node(*incumbent).score;
    return a > b || (a == b && candidate < *incumbent);
}

}  // namespace

void dp_step(DpState& state, const TrackletStore& store, const StepResult& step, const Hyperparams& params,
             const BoundingBox& b_ff) {
    // Tracklets closed by this step ended at step.frame - 1; their scores are final.
    for (int id : step.closed) {
        state.index_.insert(store.tracklet(id), state.node(id).score);
        if (outranks(state, id, state.best_closed_)) {
            state.best_closed_ = id;
        }
    }

    for (int id : step.extended) {
        HypothesisNode& n = state.nodes_.at(static_cast<std::size_t>(id));
        n.score += detection_contribution(store.tracklet(id).last(), b_ff, params);
    }

    for (int id : step.created) {
        const Tracklet& t = store.tracklet(id);
        const PredecessorChoice pred = state.index_.best(t.first().box, t.start());
        if (state.nodes_.size() != static_cast<std::size_t>(id)) {
            throw StructuralError("dp_step received tracklet " + std::to_string(id) + " out of order");
        }
        state.nodes_.push_back(HypothesisNode{pred.value + detection_contribution(t.first(), b_ff, params),
                                              pred.tracklet});
    }

    std::optional<int> best = state.best_closed_;
    for (int id : store.live()) {
        if (outranks(state, id, best)) {
            best = id;
        }
    }
    state.global_best_ = best;
}

FrameOutput select_output(const DpState& state, const TrackletStore& store, const FrameDetections& frame,
                          const Hyperparams& params) {
    FrameOutput out;
    const std::optional<int> best = state.global_best();
    std::optional<Detection> anchor;
    if (best) {
        const Tracklet& t = store.tracklet(*best);
        if (t.end() == frame.frame) {
            out.detection = t.last();
            out.confidence = t.last().score;
            out.from_hypothesis = true;
            return out;
        }
        anchor = t.last();
    }
    if (frame.detections.empty()) {
        return out;
    }

    const Detection* chosen = nullptr;
    double chosen_value = 0.0;
    for (const Detection& d : frame.detections) {
        double v = d.score;
        if (anchor) {
            const double gap = static_cast<double>(frame.frame - anchor->frame);
            v = d.score + params.w_iou * iou(d.box, anchor->box) - params.w_loc * center_distance(d.box, anchor->box) -
                params.fallback_gap_penalty * gap;
        }
        if (!chosen || v > chosen_value || (v == chosen_value && d.id < chosen->id)) {
            chosen = &d;
            chosen_value = v;
        }
    }
    out.detection = *chosen;
    out.confidence = chosen->score;
    return out;
}

RescoringEngine::RescoringEngine(const Hyperparams& params, const BoundingBox& b_ff)
    : params_(params), b_ff_(b_ff), state_(params, b_ff) {
    params_.validate();
}

TrackEntry RescoringEngine::step(const FrameDetections& frame) {
    const StepResult step = store_.step(frame, params_.join_threshold);
    dp_step(state_, store_, step, params_, b_ff_);
    const FrameOutput out = select_output(state_, store_, frame, params_);
    TrackEntry entry{frame.frame, std::nullopt, 0.0};
    if (out.detection) {
        entry.box = out.detection->box;
        entry.confidence = out.confidence;
    }
    return entry;
}

std::optional<TrackHypothesis> RescoringEngine::best_hypothesis() const {
    const std::optional<int> best = state_.global_best();
    if (!best) {
        return std::nullopt;
    }
    return state_.hypothesis(*best, store_);
}

TrackResult run_sequence(const Sequence& sequence, const Hyperparams& params) {
    RescoringEngine engine(params, sequence.first_frame_box());
    TrackResult result;
    result.entries.reserve(static_cast<std::size_t>(sequence.size()));
    for (const FrameDetections& frame : sequence.frames()) {
        result.entries.push_back(engine.step(frame));
    }
    return result;
}

TrackResult run_no_rescoring(const Sequence& sequence, const Hyperparams& /*params*/) {
    TrackResult result;
    result.entries.reserve(static_cast<std::size_t>(sequence.size()));
    for (const FrameDetections& frame : sequence.frames()) {
        const Detection* best = nullptr;
        for (const Detection& d : frame.detections) {
            if (!best || d.score > best->score || (d.score == best->score && d.id < best->id)) {
                best = &d;
            }
        }
        TrackEntry entry{frame.frame, std::nullopt, 0.0};
        if (best) {
            entry.box = best->box;
            entry.confidence = best->score;
        }
        result.entries.push_back(entry);
    }
    return result;
}

}  // namespace boltrack
