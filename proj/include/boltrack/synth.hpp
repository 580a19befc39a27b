#pragma once

#include <boltrack/model.hpp>
#include <boltrack/tracklets.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <random>
#include <span>
#include <vector>

namespace boltrack::synth {

/// Portable random source: std::mt19937_64 (fully specified by the standard)
/// with hand-written derivations so streams agree across implementations.
///   uniform():     (next() >> 11) * 2^-53, in [0, 1)
///   normal():      Box-Muller on two consecutive uniforms u1, u2:
///                  sqrt(-2 ln(1 - u1)) * cos(2 pi u2); one normal per call
///   uniform_int(n): floor(uniform() * n)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    int uniform_int(int n);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

struct ScenarioSpec {
    int frames = 300;
    double image_width = 1280.0;
    double image_height = 720.0;
    double target_width = 60.0;
    double target_height = 120.0;
    double max_speed = 3.0;      // pixels per frame, bounds every path segment
    int waypoint_interval = 40;  // frames between path waypoints
    int n_disappearances = 0;
    double mean_absence = 0.0;   // frames; runs total round(n_disappearances * mean_absence)
    int n_distractors = 0;
    double distractor_score_bias = 0.1;
    double distractor_aspect_scale = 0.6;  // distractor aspect = target aspect * scale or / scale
    double target_score = 0.8;
    double detection_noise = 0.0;  // box jitter std, pixels
    double score_noise = 0.0;
    double miss_rate = 0.0;
    int n_clutter = 0;             // random false positives per frame
    double clutter_score = 0.3;
    int pad_to = 0;                // top frames up with clutter to this many detections (0 = off)
    std::uint64_t seed = 0;

    /// Throws ConfigError for invalid or infeasible specs.
    void validate() const;
};

struct Scenario {
    std::vector<FrameDetections> frames;
    GroundTruth ground_truth;

    const BoundingBox& first_frame_box() const { return *ground_truth.boxes.front(); }
};

/// Deterministic in the spec (including seed). Draw order: target path,
/// distractor paths, absence runs, then per frame the target, each distractor,
/// the clutter, and finally a Fisher-Yates shuffle of the frame's detections.
Scenario generate(const ScenarioSpec& spec);

/// Long-term preset: 4200 frames with a disappearance count of 12 or 13
/// (13 with probability 0.4, so 12.4 in expectation) and 40.6-frame mean
/// absence, two distractors scoring +0.1 above the target, mild jitter,
/// score noise and misses.
ScenarioSpec lt_preset(std::uint64_t seed);

/// Keys are the ScenarioSpec field names; "preset = lt" starts from
/// lt_preset(seed) before the remaining keys are applied.
/// seed_override replaces the file's seed before the preset is drawn.
ScenarioSpec load_scenario(std::istream& in, const std::string& source = "<stream>",
                           std::optional<std::uint64_t> seed_override = std::nullopt);
ScenarioSpec load_scenario(const std::filesystem::path& path,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

/// Lengths and starts of the absence runs marked in a ground-truth track.
struct AbsenceRun {
    int start = 0;
    int length = 0;
};
std::vector<AbsenceRun> absence_runs(const GroundTruth& gt);

struct OracleResult {
    double score = 0.0;
    TrackHypothesis hypothesis;
};

inline constexpr std::size_t kMaxOracleTracklets = 12;

/// Exhaustive search over every temporally ordered, non-overlapping subset of
/// tracklets. Ties prefer the lexicographically smallest member list read from
/// the last tracklet backwards, which is the order the DP resolves ties in.
OracleResult oracle_best_hypothesis(std::span<const Tracklet> tracklets, const Hyperparams& params,
                                    const BoundingBox& b_ff);

/// Same search restricted to hypotheses ending in the given tracklet.
OracleResult oracle_best_ending_in(std::span<const Tracklet> tracklets, int last_id, const Hyperparams& params,
                                   const BoundingBox& b_ff);

struct MatchingResult {
    double total_iou = 0.0;
    std::vector<MatchPair> pairs;
};

inline constexpr std::size_t kMaxOracleMatching = 8;

/// Maximum-total-IoU one-to-one matching over pairs with iou >= threshold, by
/// exhaustive search.
MatchingResult oracle_matching(std::span<const BoundingBox> live, std::span<const BoundingBox> detections,
                               double threshold);

}  // namespace boltrack::synth
