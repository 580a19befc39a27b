#pragma once

#include <boltrack/model.hpp>

#include <span>
#include <vector>

namespace boltrack {

struct MatchPair {
    int live_index = 0;       // index into the live list passed to greedy_match
    int detection_index = 0;  // index into the detection list
    double iou = 0.0;

    bool operator==(const MatchPair&) const = default;
};

/// Greedy one-to-one association of live tracklet tails with detections.
///
/// Candidate pairs with iou >= threshold are taken in order of descending IoU;
/// ties go to the higher detection score, then the lower detection id, then the
/// lower live index. Each side is used at most once.
std::vector<MatchPair> greedy_match(std::span<const BoundingBox> live_tails, std::span<const Detection> detections,
                                    double threshold);

struct Assignment {
    int detection_id = 0;
    int tracklet_id = 0;
};

struct StepResult {
    int frame = 0;
    std::vector<Assignment> assignments;  // one per detection, in detection order
    std::vector<int> created;             // new singleton tracklets, ascending id
    std::vector<int> extended;            // live tracklets that gained this frame's detection
    std::vector<int> closed;              // tracklets that ended at frame - 1
};

/// Online tracklet formation. Only tracklets ending at the previous frame can
/// be extended; anything skipped for one frame is closed permanently.
class TrackletStore {
public:
    /// Ingests the next frame (must be last processed + 1, starting at 0).
    StepResult step(const FrameDetections& frame, double join_threshold);

    const Tracklet& tracklet(int id) const { return tracklets_.at(static_cast<std::size_t>(id)); }
    std::span<const Tracklet> all() const { return tracklets_; }
    std::span<const int> live() const { return live_; }
    int last_frame() const { return last_frame_; }
    int next_id() const { return static_cast<int>(tracklets_.size()); }

private:
    std::vector<Tracklet> tracklets_;  // indexed by id
    std::vector<int> live_;            // ascending id
    int last_frame_ = -1;
};

}  // namespace boltrack
