#include <boltrack/sweep.hpp>

#include <boltrack/errors.hpp>
#include <boltrack/io.hpp>
#include <boltrack/rescore.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace boltrack::sweep {

Objective parse_objective(const std::string& name) {
    if (name == "j_box") {
        return Objective::j_box;
    }
    if (name == "max_f") {
        return Objective::max_f;
    }
    if (name == "success_auc") {
        return Objective::success_auc;
    }
    throw ConfigError("unknown objective '" + name + "' (expected j_box, max_f or success_auc)");
}

metrics::Mode objective_mode(Objective objective) {
    switch (objective) {
        case Objective::max_f:
            return metrics::Mode::lt;
        case Objective::success_auc:
            return metrics::Mode::otb;
        case Objective::j_box:
            break;
    }
    return metrics::Mode::vos;
}

double objective_value(const metrics::EvalReport& report, Objective objective) {
    switch (objective) {
        case Objective::max_f:
            return report.long_term.value().max_f;
        case Objective::success_auc:
            return report.otb.value().success_auc;
        case Objective::j_box:
            break;
    }
    return report.j_box;
}

std::size_t SweepSpec::size() const {
    std::size_t n = 1;
    for (const GridAxis& axis : grid) {
        n *= axis.values.size();
    }
    return n;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        out.push_back(first == std::string::npos ? std::string() : item.substr(first, last - first + 1));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

double numeric_key(const std::string& value) {
    if (value == "true" || value == "on") {
        return 1.0;
    }
    if (value == "false" || value == "off") {
        return 0.0;
    }
    if (value == "auto") {
        return -std::numeric_limits<double>::infinity();
    }
    return std::stod(value);
}

}  // namespace

SweepSpec parse_sweep(std::istream& in, const std::string& source) {
    SweepSpec spec;
    bool has_objective = false;
    for (const io::KeyValue& kv : io::read_key_values(in, source)) {
        if (kv.key == "objective") {
            spec.objective = parse_objective(kv.value);
            has_objective = true;
            continue;
        }
        if (kv.key == "sequences") {
            spec.sequences = split_list(kv.value);
            continue;
        }
        GridAxis axis{kv.key, split_list(kv.value)};
        for (const std::string& v : axis.values) {
            if (v.empty()) {
                throw ParseError(source, kv.line, "empty value in grid list for '" + kv.key + "'");
            }
            // Rejects unknown keys and malformed values up front.
            Hyperparams probe;
            io::apply_config_value(probe, io::KeyValue{kv.key, v, kv.line}, source);
            try {
                probe.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(source + ":" + std::to_string(kv.line) + ": " + e.what());
            }
        }
        spec.grid.push_back(std::move(axis));
    }
    if (!has_objective) {
        throw ConfigError(source + ": sweep spec needs an objective");
    }
    if (spec.grid.empty()) {
        throw ConfigError(source + ": sweep grid is empty");
    }
    std::sort(spec.grid.begin(), spec.grid.end(), [](const GridAxis& a, const GridAxis& b) { return a.key < b.key; });
    return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    return parse_sweep(in, path.string());
}

SequenceData load_sequence_dir(const std::filesystem::path& dir) {
    SequenceData data;
    data.name = dir.filename().string();
    const auto csv = dir / "detections.csv";
    const auto jsonl = dir / "detections.jsonl";
    const auto detections = std::filesystem::exists(csv) ? csv : jsonl;
    data.frames = io::read_detections(detections);
    data.ground_truth = io::read_ground_truth(dir / "gt.csv");
    const std::size_t n = data.ground_truth.size();
    if (data.frames.size() > n) {
        throw StructuralError(dir.string() + ": detections extend past the ground truth");
    }
    if (!data.ground_truth.boxes.front()) {
        throw StructuralError(dir.string() + ": ground truth must be present at frame 0");
    }
    while (data.frames.size() < n) {
        data.frames.push_back(FrameDetections{static_cast<int>(data.frames.size()), {}});
    }
    return data;
}

std::vector<SequenceData> load_data_dir(const std::filesystem::path& data_dir, const std::vector<std::string>& names) {
    if (!std::filesystem::is_directory(data_dir)) {
        throw IoError(data_dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "gt.csv")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<SequenceData> out;
    for (const auto& d : dirs) {
        const std::string name = d.filename().string();
        if (names.empty() || std::find(names.begin(), names.end(), name) != names.end()) {
            out.push_back(load_sequence_dir(d));
        }
    }
    for (const std::string& name : names) {
        if (std::none_of(out.begin(), out.end(), [&](const SequenceData& s) { return s.name == name; })) {
            throw StructuralError("sequence '" + name + "' not found in " + data_dir.string());
        }
    }
    if (out.empty()) {
        throw StructuralError("no sequences found in " + data_dir.string());
    }
    return out;
}

double evaluate_params(const Hyperparams& params, const std::vector<SequenceData>& data, Objective objective) {
    std::vector<metrics::EvalReport> reports;
    reports.reserve(data.size());
    for (const SequenceData& s : data) {
        const Sequence seq = validate_sequence(s.frames, *s.ground_truth.boxes.front(), params);
        const TrackResult track = run_sequence(seq, params);
        reports.push_back(metrics::evaluate(track, s.ground_truth, objective_mode(objective)));
    }
    return objective_value(metrics::summarize(reports), objective);
}

SweepOutcome run_sweep(const SweepSpec& spec, const std::vector<SequenceData>& data, const Hyperparams& base,
                       int jobs) {
    if (data.empty()) {
        throw StructuralError("sweep needs at least one sequence");
    }
    const std::size_t total = spec.size();
    if (total == 0) {
        throw ConfigError("sweep grid has an empty axis");
    }
    std::vector<SweepRow> rows(total);
    for (std::size_t i = 0; i < total; ++i) {
        SweepRow& row = rows[i];
        row.params = base;
        std::size_t rest = i;
        row.values.resize(spec.grid.size());
        // Last axis varies fastest.
        for (std::size_t a = spec.grid.size(); a-- > 0;) {
            const GridAxis& axis = spec.grid[a];
            row.values[a] = axis.values[rest % axis.values.size()];
            rest /= axis.values.size();
        }
        for (std::size_t a = 0; a < spec.grid.size(); ++a) {
            io::apply_config_value(row.params, io::KeyValue{spec.grid[a].key, row.values[a], 0}, "sweep");
            row.key.push_back(numeric_key(row.values[a]));
        }
        row.params.validate();
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) {
                return;
            }
            try {
                rows[i].objective = evaluate_params(rows[i].params, data, spec.objective);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, total);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.objective != b.objective) {
            return a.objective > b.objective;
        }
        return a.key < b.key;
    });
    return SweepOutcome{std::move(rows)};
}

std::string leaderboard_csv(const SweepSpec& spec, const SweepOutcome& outcome) {
    std::string text = "rank,objective";
    for (const GridAxis& axis : spec.grid) {
        text += "," + axis.key;
    }
    text += "\n";
    for (std::size_t r = 0; r < outcome.ranked.size(); ++r) {
        const SweepRow& row = outcome.ranked[r];
        text += std::to_string(r + 1) + "," + io::format_number(row.objective);
        for (const std::string& v : row.values) {
            text += "," + v;
        }
        text += "\n";
    }
    return text;
}

}  // namespace boltrack::sweep
