#include <boltrack/synth.hpp>

#include <boltrack/errors.hpp>
#include <boltrack/io.hpp>
#include <boltrack/rescore.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace boltrack::synth {

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::uniform_int(int n) {
    return std::min(n - 1, static_cast<int>(uniform() * n));
}

void ScenarioSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("scenario: " + msg); };
    if (frames < 1) {
        fail("frames must be >= 1");
    }
    if (!(image_width > 0.0) || !(image_height > 0.0)) {
        fail("image size must be positive");
    }
    if (!(target_width > 0.0) || !(target_height > 0.0) || target_width > image_width ||
        target_height > image_height) {
        fail("target size must be positive and fit in the image");
    }
    if (!(max_speed >= 0.0) || waypoint_interval < 1) {
        fail("max_speed must be >= 0 and waypoint_interval >= 1");
    }
    if (n_disappearances < 0 || n_distractors < 0 || n_clutter < 0 || pad_to < 0) {
        fail("counts must be >= 0");
    }
    if (n_disappearances > 0) {
        if (!(mean_absence >= 1.0)) {
            fail("mean_absence must be >= 1 when disappearances are requested");
        }
        const long long total = std::llround(n_disappearances * mean_absence);
        // Frame 0 and one present frame between consecutive runs are required.
        if (total + n_disappearances + 0LL > frames) {
            fail("absences (" + std::to_string(total) + " frames in " + std::to_string(n_disappearances) +
                 " runs) do not fit in " + std::to_string(frames) + " frames");
        }
    }
    for (double p : {miss_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            fail("miss_rate must be in [0, 1]");
        }
    }
    if (!(detection_noise >= 0.0) || !(score_noise >= 0.0)) {
        fail("noise levels must be >= 0");
    }
    if (!(distractor_aspect_scale > 0.0)) {
        fail("distractor_aspect_scale must be > 0");
    }
    for (double v : {distractor_score_bias, target_score, clutter_score}) {
        if (!std::isfinite(v)) {
            fail("scores must be finite");
        }
    }
}

namespace {

struct Path {
    std::vector<Point> waypoints;
    int interval;
    double width;
    double height;

    Point center(int t) const {
        const auto k = static_cast<std::size_t>(t / interval);
        const double frac = static_cast<double>(t % interval) / interval;
        const Point& a = waypoints[k];
        const Point& b = waypoints[k + 1];
        return {a.x + (b.x - a.x) * frac, a.y + (b.y - a.y) * frac};
    }

    BoundingBox box(int t) const {
        const Point c = center(t);
        return BoundingBox(c.x - width / 2.0, c.y - height / 2.0, width, height);
    }
};

Path make_path(Rng& rng, const ScenarioSpec& spec, double width, double height) {
    const double lo_x = width / 2.0;
    const double hi_x = spec.image_width - width / 2.0;
    const double lo_y = height / 2.0;
    const double hi_y = spec.image_height - height / 2.0;
    Path path{{}, spec.waypoint_interval, width, height};
    const int segments = spec.frames / spec.waypoint_interval + 1;
    Point p{rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)};
    path.waypoints.push_back(p);
    const double reach = spec.max_speed * spec.waypoint_interval;
    for (int s = 0; s < segments; ++s) {
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        const double radius = reach * std::sqrt(rng.uniform());
        // Clamping into the feasible rectangle only shortens the step, so the speed bound holds.
        p = {std::clamp(p.x + radius * std::cos(angle), lo_x, hi_x),
             std::clamp(p.y + radius * std::sin(angle), lo_y, hi_y)};
        path.waypoints.push_back(p);
    }
    return path;
}

// Splits total into parts >= minimum, proportional to exponential weights;
// remainders go to the largest fractional parts (ties: lower index).
std::vector<int> random_partition(Rng& rng, int total, std::size_t parts, int minimum) {
    std::vector<double> weights(parts);
    double sum = 0.0;
    for (double& w : weights) {
        w = -std::log(1.0 - rng.uniform()) + 1e-12;
        sum += w;
    }
    const int spare = total - minimum * static_cast<int>(parts);
    std::vector<int> out(parts, minimum);
    std::vector<std::pair<double, std::size_t>> fractions;
    int assigned = 0;
    for (std::size_t i = 0; i < parts; ++i) {
        const double share = spare * weights[i] / sum;
        const int whole = static_cast<int>(std::floor(share));
        out[i] += whole;
        assigned += whole;
        fractions.push_back({share - whole, i});
    }
    std::stable_sort(fractions.begin(), fractions.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int r = 0; r < spare - assigned; ++r) {
        ++out[fractions[static_cast<std::size_t>(r) % parts].second];
    }
    return out;
}

std::vector<bool> make_presence(Rng& rng, const ScenarioSpec& spec) {
    std::vector<bool> present(static_cast<std::size_t>(spec.frames), true);
    const int n = spec.n_disappearances;
    if (n == 0) {
        return present;
    }
    const int total_absent = static_cast<int>(std::llround(n * spec.mean_absence));
    const std::vector<int> runs = random_partition(rng, total_absent, static_cast<std::size_t>(n), 1);
    // n + 1 present gaps: the first holds frame 0, inner ones separate runs, the last may be empty.
    const int present_frames = spec.frames - total_absent;
    std::vector<int> gaps = random_partition(rng, present_frames - n, static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        gaps[static_cast<std::size_t>(i)] += 1;
    }
    int t = 0;
    for (int i = 0; i < n; ++i) {
        t += gaps[static_cast<std::size_t>(i)];
        for (int k = 0; k < runs[static_cast<std::size_t>(i)]; ++k) {
            present[static_cast<std::size_t>(t++)] = false;
        }
    }
    return present;
}

BoundingBox jitter(Rng& rng, const BoundingBox& b, double sigma) {
    const double x = b.x() + sigma * rng.normal();
    const double y = b.y() + sigma * rng.normal();
    const double w = std::max(1.0, b.w() + sigma * rng.normal());
    const double h = std::max(1.0, b.h() + sigma * rng.normal());
    return BoundingBox(x, y, w, h);
}

BoundingBox clutter_box(Rng& rng, const ScenarioSpec& spec) {
    const double w = spec.target_width * rng.uniform(0.5, 1.5);
    const double h = spec.target_height * rng.uniform(0.5, 1.5);
    const double x = rng.uniform(0.0, std::max(1.0, spec.image_width - w));
    const double y = rng.uniform(0.0, std::max(1.0, spec.image_height - h));
    return BoundingBox(x, y, w, h);
}

}  // namespace

Scenario generate(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    const Path target = make_path(rng, spec, spec.target_width, spec.target_height);
    std::vector<Path> distractors;
    const double area = spec.target_width * spec.target_height;
    const double target_aspect = spec.target_width / spec.target_height;
    for (int i = 0; i < spec.n_distractors; ++i) {
        // Same area as the target, different aspect ratio.
        const double scale = rng.bernoulli(0.5) ? spec.distractor_aspect_scale : 1.0 / spec.distractor_aspect_scale;
        const double aspect = target_aspect * scale;
        double h = std::sqrt(area / aspect);
        double w = aspect * h;
        w = std::min(w, spec.image_width);
        h = std::min(h, spec.image_height);
        distractors.push_back(make_path(rng, spec, w, h));
    }
    const std::vector<bool> present = make_presence(rng, spec);

    Scenario scenario;
    scenario.frames.resize(static_cast<std::size_t>(spec.frames));
    scenario.ground_truth.boxes.resize(static_cast<std::size_t>(spec.frames));
    for (int t = 0; t < spec.frames; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        std::vector<std::pair<BoundingBox, double>> boxes;
        if (present[ti]) {
            const BoundingBox truth = target.box(t);
            scenario.ground_truth.boxes[ti] = truth;
            if (t == 0) {
                boxes.push_back({truth, spec.target_score});
            } else if (!rng.bernoulli(spec.miss_rate)) {
                const BoundingBox b = jitter(rng, truth, spec.detection_noise);
                boxes.push_back({b, spec.target_score + spec.score_noise * rng.normal()});
            }
        }
        for (const Path& d : distractors) {
            if (!rng.bernoulli(spec.miss_rate)) {
                const BoundingBox b = jitter(rng, d.box(t), spec.detection_noise);
                boxes.push_back(
                    {b, spec.target_score + spec.distractor_score_bias + spec.score_noise * rng.normal()});
            }
        }
        const int clutter = std::max(spec.n_clutter, spec.pad_to - static_cast<int>(boxes.size()));
        for (int c = 0; c < clutter; ++c) {
            const BoundingBox b = clutter_box(rng, spec);
            boxes.push_back({b, spec.clutter_score + spec.score_noise * rng.normal()});
        }
        for (std::size_t i = boxes.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)));
            std::swap(boxes[i - 1], boxes[j]);
        }
        FrameDetections& frame = scenario.frames[ti];
        frame.frame = t;
        for (const auto& [box, score] : boxes) {
            frame.detections.push_back(Detection{t, box, score, static_cast<int>(frame.detections.size())});
        }
    }
    return scenario;
}

ScenarioSpec lt_preset(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.seed = seed;
    spec.frames = 4200;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    spec.n_disappearances = rng.bernoulli(0.4) ? 13 : 12;
    spec.mean_absence = 40.6;
    spec.n_distractors = 2;
    spec.distractor_score_bias = 0.1;
    spec.detection_noise = 2.0;
    spec.score_noise = 0.05;
    spec.miss_rate = 0.05;
    return spec;
}

namespace {

void apply_scenario_value(ScenarioSpec& spec, const io::KeyValue& kv, const std::string& source) {
    const std::string& k = kv.key;
    auto as_int = [&] {
        return static_cast<int>(std::clamp(io::parse_integer(kv, source), -1LL, 1'000'000'000LL));
    };
    if (k == "frames") {
        spec.frames = as_int();
    } else if (k == "image_width") {
        spec.image_width = io::parse_double(kv, source);
    } else if (k == "image_height") {
        spec.image_height = io::parse_double(kv, source);
    } else if (k == "target_width") {
        spec.target_width = io::parse_double(kv, source);
    } else if (k == "target_height") {
        spec.target_height = io::parse_double(kv, source);
    } else if (k == "max_speed") {
        spec.max_speed = io::parse_double(kv, source);
    } else if (k == "waypoint_interval") {
        spec.waypoint_interval = as_int();
    } else if (k == "n_disappearances") {
        spec.n_disappearances = as_int();
    } else if (k == "mean_absence") {
        spec.mean_absence = io::parse_double(kv, source);
    } else if (k == "n_distractors") {
        spec.n_distractors = as_int();
    } else if (k == "distractor_score_bias") {
        spec.distractor_score_bias = io::parse_double(kv, source);
    } else if (k == "distractor_aspect_scale") {
        spec.distractor_aspect_scale = io::parse_double(kv, source);
    } else if (k == "target_score") {
        spec.target_score = io::parse_double(kv, source);
    } else if (k == "detection_noise") {
        spec.detection_noise = io::parse_double(kv, source);
    } else if (k == "score_noise") {
        spec.score_noise = io::parse_double(kv, source);
    } else if (k == "miss_rate") {
        spec.miss_rate = io::parse_double(kv, source);
    } else if (k == "n_clutter") {
        spec.n_clutter = as_int();
    } else if (k == "clutter_score") {
        spec.clutter_score = io::parse_double(kv, source);
    } else if (k == "pad_to") {
        spec.pad_to = as_int();
    } else if (k == "seed") {
        const long long s = io::parse_integer(kv, source);
        if (s < 0) {
            throw ConfigError(source + ":" + std::to_string(kv.line) + ": seed must be >= 0");
        }
        spec.seed = static_cast<std::uint64_t>(s);
    } else {
        throw ConfigError(source + ":" + std::to_string(kv.line) + ": unknown scenario key '" + k + "'");
    }
}

}  // namespace

ScenarioSpec load_scenario(std::istream& in, const std::string& source, std::optional<std::uint64_t> seed_override) {
    const std::vector<io::KeyValue> entries = io::read_key_values(in, source);
    ScenarioSpec spec;
    const auto preset = std::find_if(entries.begin(), entries.end(), [](const auto& kv) { return kv.key == "preset"; });
    if (preset != entries.end()) {
        if (preset->value != "lt") {
            throw ConfigError(source + ":" + std::to_string(preset->line) + ": unknown preset '" + preset->value +
                              "' (expected lt)");
        }
        std::uint64_t seed = 0;
        for (const auto& kv : entries) {
            if (kv.key == "seed") {
                ScenarioSpec tmp;
                apply_scenario_value(tmp, kv, source);
                seed = tmp.seed;
            }
        }
        spec = lt_preset(seed_override.value_or(seed));
    }
    for (const auto& kv : entries) {
        if (kv.key != "preset") {
            apply_scenario_value(spec, kv, source);
        }
    }
    if (seed_override) {
        spec.seed = *seed_override;
    }
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    return load_scenario(in, path.string(), seed_override);
}

std::vector<AbsenceRun> absence_runs(const GroundTruth& gt) {
    std::vector<AbsenceRun> runs;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        if (gt.boxes[t]) {
            continue;
        }
        if (!runs.empty() && runs.back().start + runs.back().length == static_cast<int>(t)) {
            ++runs.back().length;
        } else {
            runs.push_back({static_cast<int>(t), 1});
        }
    }
    return runs;
}

namespace {

OracleResult oracle_search(std::span<const Tracklet> tracklets, std::optional<int> last_id,
                           const Hyperparams& params, const BoundingBox& b_ff) {
    if (tracklets.size() > kMaxOracleTracklets) {
        throw StructuralError("oracle enumeration is limited to " + std::to_string(kMaxOracleTracklets) +
                              " tracklets, got " + std::to_string(tracklets.size()));
    }
    if (tracklets.empty()) {
        throw StructuralError("oracle needs at least one tracklet");
    }
    std::vector<const Tracklet*> by_start;
    for (const Tracklet& t : tracklets) {
        by_start.push_back(&t);
    }
    std::sort(by_start.begin(), by_start.end(), [](const Tracklet* a, const Tracklet* b) {
        return a->start() != b->start() ? a->start() < b->start() : a->id < b->id;
    });

    bool found = false;
    OracleResult best;
    std::vector<int> best_key;
    const std::uint32_t limit = 1u << by_start.size();
    std::vector<const Tracklet*> chain;
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        chain.clear();
        bool valid = true;
        for (std::size_t i = 0; i < by_start.size() && valid; ++i) {
            if ((mask >> i) & 1u) {
                if (!chain.empty() && chain.back()->end() >= by_start[i]->start()) {
                    valid = false;
                }
                chain.push_back(by_start[i]);
            }
        }
        if (!valid || (last_id && chain.back()->id != *last_id)) {
            continue;
        }
        const double score = hypothesis_score(chain, b_ff, params);
        std::vector<int> key;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            key.push_back((*it)->id);
        }
        const bool better = !found || score > best.score ||
                            (score == best.score && std::lexicographical_compare(key.begin(), key.end(),
                                                                                 best_key.begin(), best_key.end()));
        if (better) {
            found = true;
            best.score = score;
            best.hypothesis.tracklets.assign(key.rbegin(), key.rend());
            best.hypothesis.score = score;
            best.hypothesis.last_frame = chain.back()->end();
            best_key = std::move(key);
        }
    }
    if (!found) {
        throw StructuralError("no hypothesis ends in tracklet " + std::to_string(last_id.value_or(-1)));
    }
    return best;
}

}  // namespace

OracleResult oracle_best_hypothesis(std::span<const Tracklet> tracklets, const Hyperparams& params,
                                    const BoundingBox& b_ff) {
    return oracle_search(tracklets, std::nullopt, params, b_ff);
}

OracleResult oracle_best_ending_in(std::span<const Tracklet> tracklets, int last_id, const Hyperparams& params,
                                   const BoundingBox& b_ff) {
    return oracle_search(tracklets, last_id, params, b_ff);
}

namespace {

void match_recursive(std::size_t live_index, std::span<const BoundingBox> live,
                     std::span<const BoundingBox> detections, double threshold, std::vector<bool>& used,
                     std::vector<MatchPair>& current, double current_total, MatchingResult& best) {
    if (live_index == live.size()) {
        if (current_total > best.total_iou) {
            best.total_iou = current_total;
            best.pairs = current;
        }
        return;
    }
    match_recursive(live_index + 1, live, detections, threshold, used, current, current_total, best);
    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (used[d]) {
            continue;
        }
        const double v = iou(live[live_index], detections[d]);
        if (v < threshold || v <= 0.0) {
            continue;
        }
        used[d] = true;
        current.push_back({static_cast<int>(live_index), static_cast<int>(d), v});
        match_recursive(live_index + 1, live, detections, threshold, used, current, current_total + v, best);
        current.pop_back();
        used[d] = false;
    }
}

}  // namespace

MatchingResult oracle_matching(std::span<const BoundingBox> live, std::span<const BoundingBox> detections,
                               double threshold) {
    if (live.size() > kMaxOracleMatching || detections.size() > kMaxOracleMatching) {
        throw StructuralError("oracle matching is limited to " + std::to_string(kMaxOracleMatching) +
                              " boxes per side");
    }
    MatchingResult best;
    std::vector<bool> used(detections.size(), false);
    std::vector<MatchPair> current;
    match_recursive(0, live, detections, threshold, used, current, 0.0, best);
    return best;
}

}  // namespace boltrack::synth
