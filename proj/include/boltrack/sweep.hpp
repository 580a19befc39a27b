#pragma once

#include <boltrack/metrics.hpp>
#include <boltrack/model.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace boltrack::sweep {

enum class Objective { j_box, max_f, success_auc };

Objective parse_objective(const std::string& name);
metrics::Mode objective_mode(Objective objective);
double objective_value(const metrics::EvalReport& report, Objective objective);

struct GridAxis {
    std::string key;                  // a config key, e.g. "w_bnd"
    std::vector<std::string> values;  // raw config values
};

/// Grid file: "objective = j_box|max_f|success_auc", optional
/// "sequences = a, b" and one "key = v1, v2, ..." line per swept config key.
struct SweepSpec {
    std::vector<GridAxis> grid;  // sorted by key
    Objective objective = Objective::j_box;
    std::vector<std::string> sequences;  // empty: every sequence in the data dir

    std::size_t size() const;
};

SweepSpec parse_sweep(std::istream& in, const std::string& source = "<stream>");
SweepSpec load_sweep(const std::filesystem::path& path);

/// A training sequence: <dir>/detections.{csv,jsonl} plus <dir>/gt.csv. The
/// first-frame box is the ground truth at frame 0.
struct SequenceData {
    std::string name;
    std::vector<FrameDetections> frames;  // padded to the ground-truth length
    GroundTruth ground_truth;
};

SequenceData load_sequence_dir(const std::filesystem::path& dir);

/// Every subdirectory of data_dir holding a sequence, sorted by name; filtered
/// by names when non-empty. Throws StructuralError when nothing is found.
std::vector<SequenceData> load_data_dir(const std::filesystem::path& data_dir,
                                        const std::vector<std::string>& names = {});

/// Mean objective of params over the sequences.
double evaluate_params(const Hyperparams& params, const std::vector<SequenceData>& data, Objective objective);

struct SweepRow {
    std::vector<std::string> values;  // aligned with SweepSpec::grid
    std::vector<double> key;          // numeric form of values used for tie-breaks
    Hyperparams params;
    double objective = 0.0;
};

struct SweepOutcome {
    std::vector<SweepRow> ranked;  // best first; ties: lexicographically smallest key
};

/// Evaluates every grid point on top of base (grid points are independent and
/// run on up to jobs threads); the ranking does not depend on jobs.
SweepOutcome run_sweep(const SweepSpec& spec, const std::vector<SequenceData>& data, const Hyperparams& base,
                       int jobs);

std::string leaderboard_csv(const SweepSpec& spec, const SweepOutcome& outcome);

}  // namespace boltrack::sweep
