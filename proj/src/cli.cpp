#include <boltrack/cli.hpp>

#include <boltrack/errors.hpp>
#include <boltrack/rescore.hpp>
#include <boltrack/synth.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace boltrack::cli {

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static const std::shared_ptr<spdlog::logger> instance = [] {
        auto log = spdlog::stderr_logger_st("boltrack");
        log->set_pattern("%l: %v");
        log->set_level(spdlog::level::info);
        if (const char* env = std::getenv("BOLTRACK_LOG")) {
            log->set_level(spdlog::level::from_str(env));
        }
        return log;
    }();
    return instance;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace

BoundingBox parse_box(const std::string& text) {
    std::istringstream in(text);
    std::string item;
    std::vector<double> v;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw ValidationError("box must be x,y,w,h numbers, got '" + text + "'");
        }
    }
    if (v.size() != 4) {
        throw ValidationError("box must have 4 comma-separated values, got '" + text + "'");
    }
    return BoundingBox(v[0], v[1], v[2], v[3]);
}

void cmd_track(const TrackOptions& options) {
    Hyperparams params;
    if (options.config) {
        params = io::load_config(*options.config);
    } else {
        logger()->info("no config given; using default hyperparameters");
    }
    if (options.boundary_single_term) {
        params.boundary_length_weighting = false;
    }
    std::vector<FrameDetections> frames = io::read_detections(options.detections, options.format);
    if (options.frames) {
        if (*options.frames < static_cast<int>(frames.size())) {
            throw ValidationError("--frames " + std::to_string(*options.frames) + " is shorter than the " +
                                  std::to_string(frames.size()) + " frames in the detection file");
        }
        while (static_cast<int>(frames.size()) < *options.frames) {
            frames.push_back(FrameDetections{static_cast<int>(frames.size()), {}});
        }
    }
    const Sequence sequence = validate_sequence(std::move(frames), options.first_box, params);
    const TrackResult track =
        options.no_rescoring ? run_no_rescoring(sequence, params) : run_sequence(sequence, params);
    io::write_track(options.output, track);
    logger()->debug("wrote {} frames to {}", track.size(), options.output.string());
}

metrics::EvalReport cmd_eval(const EvalOptions& options) {
    const TrackResult track = io::read_track(options.track);
    const GroundTruth gt = io::read_ground_truth(options.ground_truth);
    const metrics::EvalReport report = metrics::evaluate(track, gt, options.mode);
    metrics::write_report(options.output_dir, report);
    return report;
}

void cmd_gen(const GenOptions& options) {
    const synth::ScenarioSpec spec = synth::load_scenario(options.spec, options.seed);
    const synth::Scenario scenario = synth::generate(spec);
    ensure_dir(options.output_dir);
    const char* name = options.format == io::DetectionFormat::csv ? "detections.csv" : "detections.jsonl";
    io::write_detections(options.output_dir / name, scenario.frames, options.format);
    io::write_ground_truth(options.output_dir / "gt.csv", scenario.ground_truth);
    const auto runs = synth::absence_runs(scenario.ground_truth);
    logger()->info("generated {} frames, {} absence runs", spec.frames, runs.size());
}

sweep::SweepOutcome cmd_sweep(const SweepOptions& options) {
    const sweep::SweepSpec spec = sweep::load_sweep(options.spec);
    const Hyperparams base = options.base_config ? io::load_config(*options.base_config) : Hyperparams{};
    const std::vector<sweep::SequenceData> data = sweep::load_data_dir(options.data_dir, spec.sequences);
    logger()->info("sweeping {} grid points over {} sequences with {} jobs", spec.size(), data.size(), options.jobs);
    sweep::SweepOutcome outcome = sweep::run_sweep(spec, data, base, options.jobs);
    ensure_dir(options.output_dir);
    io::write_config(options.output_dir / "best.cfg", outcome.ranked.front().params);
    write_text(options.output_dir / "leaderboard.csv", sweep::leaderboard_csv(spec, outcome));
    return outcome;
}

int run(int argc, char** argv) {
    CLI::App app{"Online box-level track rescoring and evaluation"};
    app.require_subcommand(1);

    std::string first_box;
    std::string format;
    std::string config;
    std::optional<int> frames;
    TrackOptions track;
    auto* track_cmd = app.add_subcommand("track", "Rescore a detection file into a track");
    track_cmd->add_option("--detections", track.detections, "Detection file (.csv or .jsonl)")->required();
    track_cmd->add_option("--first-box", first_box, "First-frame box as x,y,w,h")->required();
    track_cmd->add_option("--config", config, "Hyperparameter config file");
    track_cmd->add_option("--out", track.output, "Output track file")->required();
    track_cmd->add_option("--format", format, "Detection format override")->check(CLI::IsMember({"csv", "jsonl"}));
    track_cmd->add_option("--frames", frames, "Sequence length (pads trailing empty frames)");
    track_cmd->add_flag("--no-rescoring", track.no_rescoring, "Output the top-scoring detection per frame");
    track_cmd->add_flag("--boundary-single-term", track.boundary_single_term,
                        "Do not weight boundary scores by the preceding tracklet length");

    EvalOptions eval;
    std::string mode = "vos";
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a track against ground truth");
    eval_cmd->add_option("--track", eval.track, "Track file")->required();
    eval_cmd->add_option("--gt", eval.ground_truth, "Ground-truth file")->required();
    eval_cmd->add_option("--mode", mode, "vos, lt or otb")->check(CLI::IsMember({"vos", "lt", "otb"}));
    eval_cmd->add_option("--out", eval.output_dir, "Report directory")->required();

    GenOptions gen;
    std::optional<std::uint64_t> seed;
    std::string gen_format = "csv";
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario");
    gen_cmd->add_option("--spec", gen.spec, "Scenario spec file")->required();
    gen_cmd->add_option("--out", gen.output_dir, "Output directory")->required();
    gen_cmd->add_option("--seed", seed, "Override the spec seed");
    gen_cmd->add_option("--format", gen_format, "Detection format")->check(CLI::IsMember({"csv", "jsonl"}));

    SweepOptions sweep_opts;
    std::string base_config;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search hyperparameters on training sequences");
    sweep_cmd->add_option("--grid", sweep_opts.spec, "Sweep spec file")->required();
    sweep_cmd->add_option("--data", sweep_opts.data_dir, "Directory of training sequences")->required();
    sweep_cmd->add_option("--out", sweep_opts.output_dir, "Output directory")->required();
    sweep_cmd->add_option("--config", base_config, "Base config for keys not in the grid");
    sweep_cmd->add_option("--jobs", sweep_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidationError;
    }

    try {
        if (*track_cmd) {
            track.first_box = parse_box(first_box);
            if (!config.empty()) {
                track.config = config;
            }
            if (!format.empty()) {
                track.format = io::parse_format(format);
            }
            track.frames = frames;
            cmd_track(track);
        } else if (*eval_cmd) {
            eval.mode = metrics::parse_mode(mode);
            const metrics::EvalReport report = cmd_eval(eval);
            logger()->info("j_box = {}", report.j_box);
        } else if (*gen_cmd) {
            gen.seed = seed;
            gen.format = io::parse_format(gen_format);
            cmd_gen(gen);
        } else if (*sweep_cmd) {
            if (!base_config.empty()) {
                sweep_opts.base_config = base_config;
            }
            const sweep::SweepOutcome outcome = cmd_sweep(sweep_opts);
            logger()->info("best objective {}", outcome.ranked.front().objective);
        }
    } catch (const ValidationError& e) {
        logger()->error("validation: {}", e.what());
        return kValidationError;
    } catch (const IoError& e) {
        logger()->error("io: {}", e.what());
        return kIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        logger()->error("io: {}", e.what());
        return kIoError;
    }
    return kOk;
}

}  // namespace boltrack::cli
