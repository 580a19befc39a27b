#pragma once

#include <boltrack/model.hpp>
#include <boltrack/predecessor_index.hpp>
#include <boltrack/tracklets.hpp>

#include <optional>
#include <span>
#include <vector>

namespace boltrack {

/// Per-detection term of the tracklet score: s + w_ff * ff_score(b_ff, b).
double detection_contribution(const Detection& d, const BoundingBox& b_ff, const Hyperparams& params);

/// Sum of detection contributions over the tracklet, accumulated in frame order.
double tracklet_score(const Tracklet& t, const BoundingBox& b_ff, const Hyperparams& params);

/// Boundary term linking two tracklets from the tail box of one to the head box
/// of the next. With boundary_length_weighting the per-link value is multiplied
/// by the preceding tracklet's length.
double boundary_term(int prev_length, const BoundingBox& prev_last, const BoundingBox& next_first,
                     const Hyperparams& params);

/// boundary_term for two tracklets; throws StructuralError unless prev.end < next.start.
double boundary_score(const Tracklet& prev, const Tracklet& next, const Hyperparams& params);

/// Score of an ordered tracklet chain, accumulated left to right:
/// contributions of the first tracklet, then for each further tracklet the
/// weighted boundary term followed by its contributions.
/// Throws StructuralError if the chain is empty or not strictly ordered in time.
double hypothesis_score(std::span<const Tracklet* const> chain, const BoundingBox& b_ff, const Hyperparams& params);

struct HypothesisNode {
    double score = 0.0;              // best hypothesis score ending in this tracklet
    std::optional<int> predecessor;  // tracklet id, none for a hypothesis that starts here
};

/// Dynamic-programming state: the best hypothesis ending in each tracklet.
class DpState {
public:
    DpState(const Hyperparams& params, const BoundingBox& b_ff);

    const HypothesisNode& node(int tracklet_id) const { return nodes_.at(static_cast<std::size_t>(tracklet_id)); }
    std::size_t size() const { return nodes_.size(); }

    /// Tracklet ending the highest-scoring hypothesis; ties go to the lower id.
    std::optional<int> global_best() const { return global_best_; }

    /// Member tracklets of the best hypothesis ending in tracklet_id, in temporal order.
    TrackHypothesis hypothesis(int tracklet_id, const TrackletStore& store) const;

private:
    friend void dp_step(DpState& state, const TrackletStore& store, const StepResult& step,
                        const Hyperparams& params, const BoundingBox& b_ff);

    std::vector<HypothesisNode> nodes_;
    PredecessorIndex index_;
    std::optional<int> best_closed_;
    std::optional<int> global_best_;
};

/// Advances the DP by one frame; call right after TrackletStore::step for the same frame.
void dp_step(DpState& state, const TrackletStore& store, const StepResult& step, const Hyperparams& params,
             const BoundingBox& b_ff);

struct FrameOutput {
    std::optional<Detection> detection;
    double confidence = 0.0;
    bool from_hypothesis = false;  // false when the fallback rule picked the detection
};

/// Chooses the frame's output box given the updated DP state.
FrameOutput select_output(const DpState& state, const TrackletStore& store, const FrameDetections& frame,
                          const Hyperparams& params);

/// Single-object online rescoring engine. One instance per (sequence, object).
class RescoringEngine {
public:
    RescoringEngine(const Hyperparams& params, const BoundingBox& b_ff);

    /// Consumes the next frame and returns the output for it.
    TrackEntry step(const FrameDetections& frame);

    const TrackletStore& store() const { return store_; }
    const DpState& state() const { return state_; }
    const Hyperparams& params() const { return params_; }

    /// Best hypothesis over everything seen so far.
    std::optional<TrackHypothesis> best_hypothesis() const;

private:
    Hyperparams params_;
    BoundingBox b_ff_;
    TrackletStore store_;
    DpState state_;
};

TrackResult run_sequence(const Sequence& sequence, const Hyperparams& params);

/// Baseline without temporal consistency: the highest-scoring detection of
/// each frame (ties: lower id), absent when the frame is empty.
TrackResult run_no_rescoring(const Sequence& sequence, const Hyperparams& params);

}  // namespace boltrack
