#pragma once

#include <boltrack/model.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace boltrack::io {

enum class DetectionFormat { csv, jsonl };

/// ".jsonl" selects JSONL, anything else CSV.
DetectionFormat format_from_path(const std::filesystem::path& path);
DetectionFormat parse_format(std::string_view name);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double v);

// Detection streams. CSV lines are "frame,x,y,w,h,score"; JSONL lines are
// objects with exactly those keys. Blank lines and lines starting with '#'
// are ignored. Records are grouped by frame (file order kept within a frame,
// ids assigned 0..n-1 in that order) and frames 0..max are materialized, empty
// where the file has no record.
std::vector<FrameDetections> read_detections(std::istream& in, DetectionFormat format,
                                             const std::string& source = "<stream>");
std::vector<FrameDetections> read_detections(const std::filesystem::path& path,
                                             std::optional<DetectionFormat> format = std::nullopt);
void write_detections(std::ostream& out, const std::vector<FrameDetections>& frames, DetectionFormat format);
void write_detections(const std::filesystem::path& path, const std::vector<FrameDetections>& frames,
                      std::optional<DetectionFormat> format = std::nullopt);

// Ground truth: "frame,present,x,y,w,h", one line per frame, frames 0..T-1 in order.
GroundTruth read_ground_truth(std::istream& in, const std::string& source = "<stream>");
GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(std::ostream& out, const GroundTruth& gt);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);

// Track results: "frame,present,x,y,w,h,confidence"; absent frames are "t,0,0,0,0,0,0".
TrackResult read_track(std::istream& in, const std::string& source = "<stream>");
TrackResult read_track(const std::filesystem::path& path);
void write_track(std::ostream& out, const TrackResult& track);
void write_track(const std::filesystem::path& path, const TrackResult& track);

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Flat "key = value" lines; '#' starts a comment. Duplicate keys are an error.
std::vector<KeyValue> read_key_values(std::istream& in, const std::string& source = "<stream>");
std::vector<KeyValue> read_key_values(const std::filesystem::path& path);

double parse_double(const KeyValue& kv, const std::string& source);
long long parse_integer(const KeyValue& kv, const std::string& source);
bool parse_bool(const KeyValue& kv, const std::string& source);

/// Hyperparams from a config file; absent keys keep their defaults, unknown keys are rejected.
Hyperparams load_config(std::istream& in, const std::string& source = "<stream>");
Hyperparams load_config(const std::filesystem::path& path);

/// Applies one config entry to params; throws ConfigError for an unknown key.
void apply_config_value(Hyperparams& params, const KeyValue& kv, const std::string& source);

std::string format_config(const Hyperparams& params);
void write_config(const std::filesystem::path& path, const Hyperparams& params);

}  // namespace boltrack::io
