#pragma once

#include <boltrack/io.hpp>
#include <boltrack/metrics.hpp>
#include <boltrack/sweep.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace boltrack::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kIoError = 2 };

/// Parses "x,y,w,h".
BoundingBox parse_box(const std::string& text);

struct TrackOptions {
    std::filesystem::path detections;
    BoundingBox first_box{0.0, 0.0, 1.0, 1.0};
    std::optional<std::filesystem::path> config;
    std::filesystem::path output;
    std::optional<io::DetectionFormat> format;
    std::optional<int> frames;  // pad trailing empty frames up to this count
    bool no_rescoring = false;
    bool boundary_single_term = false;
};

void cmd_track(const TrackOptions& options);

struct EvalOptions {
    std::filesystem::path track;
    std::filesystem::path ground_truth;
    metrics::Mode mode = metrics::Mode::vos;
    std::filesystem::path output_dir;
};

metrics::EvalReport cmd_eval(const EvalOptions& options);

struct GenOptions {
    std::filesystem::path spec;
    std::filesystem::path output_dir;
    std::optional<std::uint64_t> seed;
    io::DetectionFormat format = io::DetectionFormat::csv;
};

void cmd_gen(const GenOptions& options);

struct SweepOptions {
    std::filesystem::path spec;
    std::filesystem::path data_dir;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> base_config;
    int jobs = 1;
};

/// Writes best.cfg and leaderboard.csv into output_dir.
sweep::SweepOutcome cmd_sweep(const SweepOptions& options);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace boltrack::cli
