#include <boltrack/errors.hpp>
#include <boltrack/rescore.hpp>
#include <boltrack/synth.hpp>

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace boltrack;
using namespace boltrack::synth;

TEST(Rng, ReproducibleAndInRange) {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        const int k = a.uniform_int(7);
        EXPECT_EQ(k, b.uniform_int(7));
        EXPECT_GE(k, 0);
        EXPECT_LT(k, 7);
    }
}

TEST(Rng, UniformUsesTopBits) {
    std::mt19937_64 engine(9);
    Rng rng(9);
    const std::uint64_t raw = engine();
    EXPECT_EQ(rng.uniform(), static_cast<double>(raw >> 11) * 0x1.0p-53);
}

TEST(Generate, NoiseFreeCollapse) {
    ScenarioSpec spec;
    spec.frames = 120;
    spec.seed = 3;
    const Scenario sc = generate(spec);
    ASSERT_EQ(sc.frames.size(), 120u);
    for (std::size_t t = 0; t < sc.frames.size(); ++t) {
        ASSERT_EQ(sc.frames[t].detections.size(), 1u);
        EXPECT_EQ(sc.frames[t].detections[0].box, *sc.ground_truth.boxes[t]);
        EXPECT_EQ(sc.frames[t].detections[0].score, spec.target_score);
    }
}

TEST(Generate, TargetStaysInsideImageAndUnderSpeedLimit) {
    ScenarioSpec spec;
    spec.frames = 500;
    spec.seed = 8;
    const Scenario sc = generate(spec);
    for (std::size_t t = 0; t < sc.frames.size(); ++t) {
        const BoundingBox& b = *sc.ground_truth.boxes[t];
        EXPECT_GE(b.x(), -1e-9);
        EXPECT_LE(b.right(), spec.image_width + 1e-9);
        if (t > 0) {
            EXPECT_LE(center_distance(b, *sc.ground_truth.boxes[t - 1]), spec.max_speed + 1e-9);
        }
    }
}

TEST(Generate, AbsenceRunsRecount) {
    ScenarioSpec spec;
    spec.frames = 100;
    spec.n_disappearances = 2;
    spec.mean_absence = 5;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        spec.seed = seed;
        const Scenario sc = generate(spec);
        const auto runs = absence_runs(sc.ground_truth);
        ASSERT_EQ(runs.size(), 2u);
        EXPECT_EQ(runs[0].length + runs[1].length, 10);
        EXPECT_TRUE(sc.ground_truth.boxes[0].has_value());
        for (const auto& r : runs) {
            for (int t = r.start; t < r.start + r.length; ++t) {
                EXPECT_TRUE(sc.frames[static_cast<std::size_t>(t)].detections.empty());
            }
        }
    }
}

TEST(Generate, LongTermPresetStatistics) {
    double total_runs = 0;
    double total_absent = 0;
    const int videos = 500;
    for (int seed = 0; seed < videos; ++seed) {
        const ScenarioSpec spec = lt_preset(static_cast<std::uint64_t>(seed));
        EXPECT_TRUE(spec.n_disappearances == 12 || spec.n_disappearances == 13);
        EXPECT_EQ(spec.frames, 4200);
        total_runs += spec.n_disappearances;
        total_absent += std::llround(spec.n_disappearances * spec.mean_absence);
    }
    // Binomial(500, 0.4) has sd ~11, so the mean count stays within 0.1 of 12.4.
    EXPECT_NEAR(total_runs / videos, 12.4, 0.1);
    EXPECT_NEAR(total_absent / total_runs, 40.6, 0.05);

    const Scenario sc = generate(lt_preset(1));
    const auto runs = absence_runs(sc.ground_truth);
    EXPECT_EQ(static_cast<int>(runs.size()), lt_preset(1).n_disappearances);
    int absent = 0;
    for (const auto& r : runs) {
        absent += r.length;
    }
    EXPECT_EQ(absent, std::llround(lt_preset(1).n_disappearances * 40.6));
}

TEST(Generate, Deterministic) {
    ScenarioSpec spec = lt_preset(11);
    spec.frames = 800;
    spec.n_disappearances = 4;
    spec.n_clutter = 3;
    EXPECT_EQ(generate(spec).frames, generate(spec).frames);
    ScenarioSpec other = spec;
    other.seed = 12;
    EXPECT_NE(generate(spec).frames, generate(other).frames);
}

TEST(Generate, PadTo) {
    ScenarioSpec spec = lt_preset(2);
    spec.frames = 200;
    spec.n_disappearances = 1;
    spec.pad_to = 100;
    for (const auto& f : generate(spec).frames) {
        EXPECT_EQ(f.detections.size(), 100u);
    }
}

TEST(Generate, InfeasibleSpecRejected) {
    ScenarioSpec spec;
    spec.frames = 50;
    spec.n_disappearances = 5;
    spec.mean_absence = 10;
    EXPECT_THROW(generate(spec), ConfigError);
    spec.frames = 0;
    EXPECT_THROW(generate(spec), ConfigError);
}

TEST(LoadScenario, PresetAndOverrides) {
    std::istringstream in("preset = lt\nframes = 1000\nseed = 7\n");
    const ScenarioSpec spec = load_scenario(in);
    ScenarioSpec want = lt_preset(7);
    want.frames = 1000;
    EXPECT_EQ(spec.frames, 1000);
    EXPECT_EQ(spec.n_disappearances, want.n_disappearances);
    EXPECT_EQ(spec.seed, 7u);

    std::istringstream again("preset = lt\nseed = 7\n");
    EXPECT_EQ(load_scenario(again, "<s>", 9).seed, 9u);

    std::istringstream bad("n_ghosts = 3\n");
    EXPECT_THROW(load_scenario(bad), ConfigError);
}

TEST(Oracle, SingleAndOverlapping) {
    const BoundingBox b_ff(0, 0, 10, 10);
    const Hyperparams p;
    std::vector<Tracklet> one = {Tracklet{0, {Detection{0, BoundingBox(0, 0, 10, 10), 0.5, 0}}}};
    const OracleResult r1 = oracle_best_hypothesis(one, p, b_ff);
    EXPECT_EQ(r1.hypothesis.tracklets, std::vector<int>{0});
    EXPECT_DOUBLE_EQ(r1.score, 0.5 + p.w_ff * ff_score(b_ff, one[0].first().box, p.alpha_ff));

    std::vector<Tracklet> overlapping = {
        Tracklet{0, {Detection{0, BoundingBox(0, 0, 10, 10), 0.5, 0}, Detection{1, BoundingBox(0, 0, 10, 10), 0.5, 0}}},
        Tracklet{1, {Detection{1, BoundingBox(50, 0, 10, 10), 2.0, 1}}},
    };
    const OracleResult r2 = oracle_best_hypothesis(overlapping, p, b_ff);
    EXPECT_EQ(r2.hypothesis.tracklets, std::vector<int>{1});
}

TEST(Oracle, Guards) {
    std::vector<Tracklet> many;
    for (int i = 0; i < 13; ++i) {
        many.push_back(Tracklet{i, {Detection{i, BoundingBox(0, 0, 10, 10), 0.5, 0}}});
    }
    EXPECT_THROW(oracle_best_hypothesis(many, Hyperparams{}, BoundingBox(0, 0, 10, 10)), StructuralError);
    const std::vector<BoundingBox> nine(9, BoundingBox(0, 0, 1, 1));
    EXPECT_THROW(oracle_matching(nine, nine, 0.5), StructuralError);
}

TEST(OracleMatching, Examples) {
    const std::vector<BoundingBox> live = {BoundingBox(0, 0, 10, 10)};
    const std::vector<BoundingBox> near = {BoundingBox(1, 0, 10, 10)};
    const MatchingResult m = oracle_matching(live, near, 0.5);
    ASSERT_EQ(m.pairs.size(), 1u);
    EXPECT_DOUBLE_EQ(m.total_iou, 9.0 / 11.0);
    const std::vector<BoundingBox> far = {BoundingBox(100, 0, 10, 10)};
    EXPECT_EQ(oracle_matching(live, far, 0.5).total_iou, 0.0);
    EXPECT_TRUE(oracle_matching(live, far, 0.5).pairs.empty());
}
