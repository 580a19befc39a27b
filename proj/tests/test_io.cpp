#include <boltrack/errors.hpp>
#include <boltrack/io.hpp>
#include <boltrack/synth.hpp>

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace boltrack;

namespace {

std::vector<FrameDetections> read_csv(const std::string& text) {
    std::istringstream in(text);
    return io::read_detections(in, io::DetectionFormat::csv, "test.csv");
}

}  // namespace

TEST(ReadDetections, WellFormedCsv) {
    const auto frames = read_csv("0,10,10,20,20,0.9\n1,11,10,20,20,0.8\n");
    ASSERT_EQ(frames.size(), 2u);
    EXPECT_EQ(frames[0].detections.size(), 1u);
    EXPECT_EQ(frames[1].detections.size(), 1u);
    EXPECT_EQ(frames[1].detections[0].box, BoundingBox(11, 10, 20, 20));
    EXPECT_EQ(frames[1].detections[0].score, 0.8);
}

TEST(ReadDetections, EmptyFileHasNoFrames) {
    try {
        read_csv("");
        FAIL();
    } catch (const StructuralError& e) {
        EXPECT_NE(std::string(e.what()).find("no frames"), std::string::npos);
    }
}

TEST(ReadDetections, MaterializesMissingFrames) {
    const auto frames = read_csv("5,0,0,1,1,0.1\n0,0,0,1,1,0.2\n");
    ASSERT_EQ(frames.size(), 6u);
    for (int t = 1; t <= 4; ++t) {
        EXPECT_TRUE(frames[static_cast<std::size_t>(t)].detections.empty());
        EXPECT_EQ(frames[static_cast<std::size_t>(t)].frame, t);
    }
}

TEST(ReadDetections, PerFrameOrderAndIds) {
    const auto frames = read_csv("0,0,0,1,1,0.1\n1,5,5,1,1,0.3\n0,9,9,2,2,0.2\n");
    ASSERT_EQ(frames[0].detections.size(), 2u);
    EXPECT_EQ(frames[0].detections[0].id, 0);
    EXPECT_EQ(frames[0].detections[1].id, 1);
    EXPECT_EQ(frames[0].detections[1].box, BoundingBox(9, 9, 2, 2));
}

TEST(ReadDetections, NegativeSizeRejectedWithLine) {
    try {
        read_csv("0,0,0,1,1,0.1\n0,0,0,-3,1,0.1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("rejected record"), std::string::npos);
    }
}

TEST(ReadDetections, MalformedLinesRejected) {
    EXPECT_THROW(read_csv("0,0,0,1,1\n"), ParseError);
    EXPECT_THROW(read_csv("0,0,0,1,1,abc\n"), ParseError);
    EXPECT_THROW(read_csv("-1,0,0,1,1,0.5\n"), ParseError);
    EXPECT_THROW(read_csv("0.5,0,0,1,1,0.5\n"), ParseError);
    EXPECT_THROW(read_csv("0,0,0,0,1,0.5\n"), ParseError);
    EXPECT_THROW(read_csv("0,0,0,1,1,nan\n"), ParseError);
}

TEST(ReadDetections, CommentsAndBlankLinesIgnored) {
    const auto frames = read_csv("# frame,x,y,w,h,score\n\n0,0,0,1,1,0.1\n");
    EXPECT_EQ(frames.size(), 1u);
}

TEST(ReadDetections, JsonlMatchesCsv) {
    std::istringstream in(R"({"frame":0,"x":10,"y":10,"w":20,"h":20,"score":0.9}
{"frame":1,"x":11.5,"y":10,"w":20,"h":20,"score":0.8}
)");
    const auto jsonl = io::read_detections(in, io::DetectionFormat::jsonl);
    EXPECT_EQ(jsonl, read_csv("0,10,10,20,20,0.9\n1,11.5,10,20,20,0.8\n"));
}

TEST(ReadDetections, JsonlRejectsMissingOrExtraKeys) {
    std::istringstream missing(R"({"frame":0,"x":10,"y":10,"w":20,"score":0.9})");
    EXPECT_THROW(io::read_detections(missing, io::DetectionFormat::jsonl), ParseError);
    std::istringstream extra(R"({"frame":0,"x":10,"y":10,"w":20,"h":2,"score":0.9,"c":1})");
    EXPECT_THROW(io::read_detections(extra, io::DetectionFormat::jsonl), ParseError);
    std::istringstream broken("{not json");
    EXPECT_THROW(io::read_detections(broken, io::DetectionFormat::jsonl), ParseError);
}

TEST(DetectionRoundTrip, RandomFramesBothFormats) {
    synth::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<FrameDetections> frames;
        const int n = 1 + rng.uniform_int(8);
        for (int t = 0; t < n; ++t) {
            FrameDetections f{t, {}};
            const int k = rng.uniform_int(4);
            for (int i = 0; i < k; ++i) {
                f.detections.push_back(Detection{t, boltrack::testing::random_box(rng), rng.normal() * 3, i});
            }
            frames.push_back(f);
        }
        // A trailing empty frame cannot be represented in a detection file.
        if (frames.back().detections.empty()) {
            frames.back().detections.push_back(Detection{n - 1, BoundingBox(1, 2, 3, 4), 0.5, 0});
        }
        for (auto fmt : {io::DetectionFormat::csv, io::DetectionFormat::jsonl}) {
            std::stringstream buf;
            io::write_detections(buf, frames, fmt);
            EXPECT_EQ(io::read_detections(buf, fmt), frames);
        }
    }
}

TEST(Track, AbsentFrameEncoding) {
    TrackResult track{{TrackEntry{0, BoundingBox(1, 2, 3, 4), 0.25}, TrackEntry{1, std::nullopt, 0.0}}};
    std::stringstream buf;
    io::write_track(buf, track);
    EXPECT_EQ(buf.str(), "0,1,1,2,3,4,0.25\n1,0,0,0,0,0,0\n");
}

TEST(Track, RoundTripPreservesEveryDigit) {
    synth::Rng rng(5);
    TrackResult track;
    for (int t = 0; t < 200; ++t) {
        if (rng.bernoulli(0.2)) {
            track.entries.push_back(TrackEntry{t, std::nullopt, 0.0});
        } else {
            track.entries.push_back(TrackEntry{t, boltrack::testing::random_box(rng), rng.uniform() / 3.0});
        }
    }
    std::stringstream buf;
    io::write_track(buf, track);
    EXPECT_EQ(io::read_track(buf), track);
}

TEST(Track, ReaderRejectsBadRows) {
    std::istringstream gap("0,0,0,0,0,0,0\n2,0,0,0,0,0,0\n");
    EXPECT_THROW(io::read_track(gap), ParseError);
    std::istringstream absent_conf("0,0,0,0,0,0,0.5\n");
    EXPECT_THROW(io::read_track(absent_conf), ParseError);
    std::istringstream present_flag("0,2,0,0,1,1,0.5\n");
    EXPECT_THROW(io::read_track(present_flag), ParseError);
}

TEST(GroundTruth, RoundTrip) {
    GroundTruth gt{{BoundingBox(1, 2, 3, 4), std::nullopt, BoundingBox(0.1, 0.2, 0.3, 0.4)}};
    std::stringstream buf;
    io::write_ground_truth(buf, gt);
    EXPECT_EQ(buf.str(), "0,1,1,2,3,4\n1,0,0,0,0,0\n2,1,0.1,0.2,0.3,0.4\n");
    EXPECT_EQ(io::read_ground_truth(buf), gt);
}

TEST(Config, EmptyGivesDefaults) {
    std::istringstream in("");
    EXPECT_EQ(io::load_config(in), Hyperparams{});
}

TEST(Config, JoinThreshold) {
    std::istringstream in("join_threshold = 0.7\n");
    EXPECT_EQ(io::load_config(in).join_threshold, 0.7);
    std::istringstream bad("join_threshold = 1.5\n");
    EXPECT_THROW(io::load_config(bad), ConfigError);
}

TEST(Config, UnknownKeyAndTypeMismatch) {
    std::istringstream unknown("w_foo = 1\n");
    EXPECT_THROW(io::load_config(unknown), ConfigError);
    std::istringstream mismatch("w_ff = heavy\n");
    EXPECT_THROW(io::load_config(mismatch), ParseError);
    std::istringstream flag("boundary_length_weighting = maybe\n");
    EXPECT_THROW(io::load_config(flag), ParseError);
    std::istringstream dup("w_ff = 1\nw_ff = 2\n");
    EXPECT_THROW(io::load_config(dup), ParseError);
}

TEST(Config, FormatRoundTrip) {
    Hyperparams p;
    p.w_ff = 0.125;
    p.alpha_bnd = -0.3;
    p.boundary_length_weighting = false;
    p.anchor_score = 2.5;
    p.predecessor_horizon = 40;
    std::istringstream in(io::format_config(p));
    EXPECT_EQ(io::load_config(in), p);
    std::istringstream defaults(io::format_config(Hyperparams{}));
    EXPECT_EQ(io::load_config(defaults), Hyperparams{});
}

TEST(Config, CommentsAllowed) {
    std::istringstream in("# tuned\nw_loc = 0.01  # per pixel\n");
    EXPECT_EQ(io::load_config(in).w_loc, 0.01);
}

TEST(Io, MissingFileIsIoError) {
    EXPECT_THROW(io::read_detections(std::filesystem::path("/nonexistent/dets.csv")), IoError);
    EXPECT_THROW(io::load_config(std::filesystem::path("/nonexistent/c.cfg")), IoError);
}

TEST(Io, FormatSelection) {
    EXPECT_EQ(io::format_from_path("a/b.jsonl"), io::DetectionFormat::jsonl);
    EXPECT_EQ(io::format_from_path("a/b.csv"), io::DetectionFormat::csv);
    EXPECT_THROW(io::parse_format("xml"), ConfigError);
}
