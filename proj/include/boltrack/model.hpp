#pragma once

#include <boltrack/geometry.hpp>

#include <optional>
#include <span>
#include <vector>

namespace boltrack {

struct Detection {
    int frame = 0;
    BoundingBox box{0.0, 0.0, 1.0, 1.0};
    double score = 0.0;
    int id = 0;  // unique within its frame

    bool operator==(const Detection&) const = default;
};

struct FrameDetections {
    int frame = 0;
    std::vector<Detection> detections;

    bool operator==(const FrameDetections&) const = default;
};

/// A run of detections on consecutive frames, one per frame.
struct Tracklet {
    int id = 0;
    std::vector<Detection> detections;

    int start() const { return detections.front().frame; }
    int end() const { return detections.back().frame; }
    int length() const { return static_cast<int>(detections.size()); }
    const Detection& first() const { return detections.front(); }
    const Detection& last() const { return detections.back(); }
};

/// Checks contiguity, start <= end and the IoU gate; throws StructuralError.
void check_tracklet(const Tracklet& tracklet, double join_threshold);

/// Temporally ordered chain of non-overlapping tracklets.
struct TrackHypothesis {
    std::vector<int> tracklets;
    double score = 0.0;
    int last_frame = -1;

    bool operator==(const TrackHypothesis&) const = default;
};

struct TrackEntry {
    int frame = 0;
    std::optional<BoundingBox> box;
    double confidence = 0.0;

    bool operator==(const TrackEntry&) const = default;
};

struct TrackResult {
    std::vector<TrackEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool operator==(const TrackResult&) const = default;
};

/// Per-frame ground truth; an empty optional marks target absence.
struct GroundTruth {
    std::vector<std::optional<BoundingBox>> boxes;

    std::size_t size() const { return boxes.size(); }
    bool operator==(const GroundTruth&) const = default;
};

struct Hyperparams {
    double w_ff = 1.0;
    double alpha_ff = 0.5;
    double w_bnd = 1.0;
    double w_iou = 1.0;
    double w_loc = 0.002;
    double alpha_bnd = 0.1;
    double join_threshold = 0.7;
    bool boundary_length_weighting = true;
    double fallback_gap_penalty = 0.05;

    // Engine plumbing knobs.
    int max_detections = 100;            // per-frame cap, keeps the top-scoring
    std::optional<double> anchor_score;  // injected first-frame box score; frame-0 max if unset
    int predecessor_horizon = 0;         // frames; 0 = unlimited

    /// Throws ConfigError naming the offending field.
    void validate() const;

    bool operator==(const Hyperparams&) const = default;
};

/// Read-only, validated detection stream: frames 0..T-1 with the first-frame
/// box injected at frame 0 as detection id 0.
class Sequence {
public:
    int size() const { return static_cast<int>(frames_.size()); }
    std::span<const FrameDetections> frames() const { return frames_; }
    const FrameDetections& frame(int t) const { return frames_.at(static_cast<std::size_t>(t)); }
    const BoundingBox& first_frame_box() const { return first_frame_box_; }
    double anchor_score() const { return anchor_score_; }

    /// Prefix of the first n frames, sharing the same anchor.
    Sequence prefix(int n) const;

private:
    friend Sequence validate_sequence(std::vector<FrameDetections>, const BoundingBox&, const Hyperparams&);

    Sequence(std::vector<FrameDetections> frames, BoundingBox first_frame_box, double anchor_score)
        : frames_(std::move(frames)), first_frame_box_(first_frame_box), anchor_score_(anchor_score) {}

    std::vector<FrameDetections> frames_;
    BoundingBox first_frame_box_;
    double anchor_score_;
};

/// Validates raw per-frame detections and injects the first-frame anchor.
///
/// The anchor score is params.anchor_score when set, otherwise the highest
/// score among frame-0 detections (1.0 when frame 0 is empty). Only frame 0
/// is consulted so every later output depends on past frames alone.
///
/// Frames must be indexed 0..T-1 without gaps (empty frames are explicit).
/// Each frame is capped at params.max_detections, keeping the highest scores
/// (ties: lower id). At frame 0 the anchor box takes id 0 and the remaining
/// detections are renumbered 1..n in their original order.
Sequence validate_sequence(std::vector<FrameDetections> frames, const BoundingBox& first_frame_box,
                           const Hyperparams& params);

}  // namespace boltrack
