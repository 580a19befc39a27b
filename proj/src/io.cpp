#include <boltrack/io.hpp>

#include <boltrack/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace boltrack::io {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool skippable(std::string_view line) {
    const std::string_view t = trim(line);
    return t.empty() || t.front() == '#';
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return fields;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<long long> to_integer(std::string_view s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

struct RawDetection {
    long long frame;
    double x, y, w, h, score;
};

double field_double(std::string_view s, const char* name, const std::string& source, std::size_t line) {
    const auto v = to_double(s);
    if (!v) {
        throw ParseError(source, line, std::string("field '") + name + "' is not a finite number: '" +
                                           std::string(s) + "'");
    }
    return *v;
}

int field_frame(std::string_view s, const std::string& source, std::size_t line) {
    const auto v = to_integer(s);
    if (!v || *v < 0 || *v > 100'000'000) {
        throw ParseError(source, line, "frame must be a non-negative integer, got '" + std::string(s) + "'");
    }
    return static_cast<int>(*v);
}

RawDetection parse_csv_detection(std::string_view text, const std::string& source, std::size_t line) {
    const auto f = split_fields(text);
    if (f.size() != 6) {
        throw ParseError(source, line, "expected 6 fields frame,x,y,w,h,score, got " + std::to_string(f.size()));
    }
    return RawDetection{field_frame(f[0], source, line),    field_double(f[1], "x", source, line),
                        field_double(f[2], "y", source, line), field_double(f[3], "w", source, line),
                        field_double(f[4], "h", source, line), field_double(f[5], "score", source, line)};
}

RawDetection parse_jsonl_detection(std::string_view text, const std::string& source, std::size_t line) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw ParseError(source, line, "expected a JSON object");
    }
    static const std::array<const char*, 6> keys = {"frame", "x", "y", "w", "h", "score"};
    if (obj.size() != keys.size()) {
        throw ParseError(source, line, "expected exactly the keys frame,x,y,w,h,score");
    }
    std::array<double, 6> values{};
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto it = obj.find(keys[i]);
        if (it == obj.end() || !it->is_number()) {
            throw ParseError(source, line, std::string("missing or non-numeric key '") + keys[i] + "'");
        }
        values[i] = it->get<double>();
        if (!std::isfinite(values[i])) {
            throw ParseError(source, line, std::string("key '") + keys[i] + "' is not finite");
        }
    }
    const auto& frame = obj["frame"];
    if (!frame.is_number_integer() || frame.get<long long>() < 0) {
        throw ParseError(source, line, "frame must be a non-negative integer");
    }
    return RawDetection{frame.get<long long>(), values[1], values[2], values[3], values[4], values[5]};
}

BoundingBox make_box(double x, double y, double w, double h, const std::string& source, std::size_t line) {
    if (w < 0.0 || h < 0.0) {
        throw ParseError(source, line, "rejected record: negative width or height");
    }
    try {
        return BoundingBox(x, y, w, h);
    } catch (const GeometryError& e) {
        throw ParseError(source, line, std::string("rejected record: ") + e.what());
    }
}

template <typename LineFn>
void for_each_line(std::istream& in, LineFn&& fn) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!skippable(line)) {
            fn(std::string_view(line), number);
        }
    }
    if (in.bad()) {
        throw IoError("read failure");
    }
}

}  // namespace

DetectionFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".jsonl" ? DetectionFormat::jsonl : DetectionFormat::csv;
}

DetectionFormat parse_format(std::string_view name) {
    if (name == "csv") {
        return DetectionFormat::csv;
    }
    if (name == "jsonl") {
        return DetectionFormat::jsonl;
    }
    throw ConfigError("unknown detection format '" + std::string(name) + "' (expected csv or jsonl)");
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) {
        throw IoError("number formatting failed");
    }
    return std::string(buf.data(), ptr);
}

std::vector<FrameDetections> read_detections(std::istream& in, DetectionFormat format, const std::string& source) {
    std::map<int, std::vector<Detection>> grouped;
    int max_frame = -1;
    for_each_line(in, [&](std::string_view text, std::size_t line) {
        const RawDetection r = format == DetectionFormat::csv ? parse_csv_detection(text, source, line)
                                                              : parse_jsonl_detection(text, source, line);
        const int frame = static_cast<int>(r.frame);
        const BoundingBox box = make_box(r.x, r.y, r.w, r.h, source, line);
        auto& dets = grouped[frame];
        dets.push_back(Detection{frame, box, r.score, static_cast<int>(dets.size())});
        max_frame = std::max(max_frame, frame);
    });
    if (max_frame < 0) {
        throw StructuralError(source + ": no frames");
    }
    std::vector<FrameDetections> frames(static_cast<std::size_t>(max_frame) + 1);
    for (int t = 0; t <= max_frame; ++t) {
        frames[static_cast<std::size_t>(t)].frame = t;
    }
    for (auto& [frame, dets] : grouped) {
        frames[static_cast<std::size_t>(frame)].detections = std::move(dets);
    }
    return frames;
}

std::vector<FrameDetections> read_detections(const std::filesystem::path& path,
                                             std::optional<DetectionFormat> format) {
    auto in = open_input(path);
    return read_detections(in, format.value_or(format_from_path(path)), path.string());
}

void write_detections(std::ostream& out, const std::vector<FrameDetections>& frames, DetectionFormat format) {
    for (const FrameDetections& f : frames) {
        for (const Detection& d : f.detections) {
            if (format == DetectionFormat::csv) {
                out << d.frame << ',' << format_number(d.box.x()) << ',' << format_number(d.box.y()) << ','
                    << format_number(d.box.w()) << ',' << format_number(d.box.h()) << ','
                    << format_number(d.score) << '\n';
            } else {
                nlohmann::ordered_json obj;
                obj["frame"] = d.frame;
                obj["x"] = d.box.x();
                obj["y"] = d.box.y();
                obj["w"] = d.box.w();
                obj["h"] = d.box.h();
                obj["score"] = d.score;
                out << obj.dump() << '\n';
            }
        }
    }
}

void write_detections(const std::filesystem::path& path, const std::vector<FrameDetections>& frames,
                      std::optional<DetectionFormat> format) {
    auto out = open_output(path);
    write_detections(out, frames, format.value_or(format_from_path(path)));
    finish_output(out, path);
}

namespace {

// Shared reader for the per-frame "frame,present,x,y,w,h[,confidence]" files.
template <typename RowFn>
std::size_t read_frame_rows(std::istream& in, std::size_t expected_fields, const std::string& source, RowFn&& fn) {
    std::size_t next_frame = 0;
    for_each_line(in, [&](std::string_view text, std::size_t line) {
        const auto f = split_fields(text);
        if (f.size() != expected_fields) {
            throw ParseError(source, line, "expected " + std::to_string(expected_fields) + " fields, got " +
                                               std::to_string(f.size()));
        }
        const int frame = field_frame(f[0], source, line);
        if (static_cast<std::size_t>(frame) != next_frame) {
            throw ParseError(source, line, "expected frame " + std::to_string(next_frame) + ", got " +
                                               std::to_string(frame));
        }
        const auto present = to_integer(f[1]);
        if (!present || (*present != 0 && *present != 1)) {
            throw ParseError(source, line, "present must be 0 or 1");
        }
        std::optional<BoundingBox> box;
        if (*present == 1) {
            box = make_box(field_double(f[2], "x", source, line), field_double(f[3], "y", source, line),
                           field_double(f[4], "w", source, line), field_double(f[5], "h", source, line), source,
                           line);
        }
        fn(frame, box, f, line);
        ++next_frame;
    });
    if (next_frame == 0) {
        throw StructuralError(source + ": no frames");
    }
    return next_frame;
}

}  // namespace

GroundTruth read_ground_truth(std::istream& in, const std::string& source) {
    GroundTruth gt;
    read_frame_rows(in, 6, source,
                    [&](int, const std::optional<BoundingBox>& box, const auto&, std::size_t) {
                        gt.boxes.push_back(box);
                    });
    return gt;
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_ground_truth(in, path.string());
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
    for (std::size_t t = 0; t < gt.boxes.size(); ++t) {
        const auto& b = gt.boxes[t];
        if (b) {
            out << t << ",1," << format_number(b->x()) << ',' << format_number(b->y()) << ','
                << format_number(b->w()) << ',' << format_number(b->h()) << '\n';
        } else {
            out << t << ",0,0,0,0,0\n";
        }
    }
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
    auto out = open_output(path);
    write_ground_truth(out, gt);
    finish_output(out, path);
}

TrackResult read_track(std::istream& in, const std::string& source) {
    TrackResult track;
    read_frame_rows(in, 7, source,
                    [&](int frame, const std::optional<BoundingBox>& box, const auto& f, std::size_t line) {
                        const double conf = field_double(f[6], "confidence", source, line);
                        if (!box && conf != 0.0) {
                            throw ParseError(source, line, "absent entry must carry confidence 0");
                        }
                        track.entries.push_back(TrackEntry{frame, box, conf});
                    });
    return track;
}

TrackResult read_track(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_track(in, path.string());
}

void write_track(std::ostream& out, const TrackResult& track) {
    for (const TrackEntry& e : track.entries) {
        if (e.box) {
            out << e.frame << ",1," << format_number(e.box->x()) << ',' << format_number(e.box->y()) << ','
                << format_number(e.box->w()) << ',' << format_number(e.box->h()) << ','
                << format_number(e.confidence) << '\n';
        } else {
            out << e.frame << ",0,0,0,0,0,0\n";
        }
    }
}

void write_track(const std::filesystem::path& path, const TrackResult& track) {
    auto out = open_output(path);
    write_track(out, track);
    finish_output(out, path);
}

std::vector<KeyValue> read_key_values(std::istream& in, const std::string& source) {
    std::vector<KeyValue> entries;
    std::set<std::string> seen;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(source, number, "expected 'key = value'");
        }
        KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), number};
        if (kv.key.empty() || kv.value.empty()) {
            throw ParseError(source, number, "empty key or value");
        }
        if (!seen.insert(kv.key).second) {
            throw ParseError(source, number, "duplicate key '" + kv.key + "'");
        }
        entries.push_back(std::move(kv));
    }
    if (in.bad()) {
        throw IoError(source + ": read failure");
    }
    return entries;
}

std::vector<KeyValue> read_key_values(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_key_values(in, path.string());
}

double parse_double(const KeyValue& kv, const std::string& source) {
    const auto v = to_double(kv.value);
    if (!v) {
        throw ParseError(source, kv.line, "'" + kv.key + "' expects a number, got '" + kv.value + "'");
    }
    return *v;
}

long long parse_integer(const KeyValue& kv, const std::string& source) {
    const auto v = to_integer(kv.value);
    if (!v) {
        throw ParseError(source, kv.line, "'" + kv.key + "' expects an integer, got '" + kv.value + "'");
    }
    return *v;
}

bool parse_bool(const KeyValue& kv, const std::string& source) {
    const std::string& v = kv.value;
    if (v == "true" || v == "on" || v == "1") {
        return true;
    }
    if (v == "false" || v == "off" || v == "0") {
        return false;
    }
    throw ParseError(source, kv.line, "'" + kv.key + "' expects true/false, got '" + v + "'");
}

void apply_config_value(Hyperparams& params, const KeyValue& kv, const std::string& source) {
    const std::string& k = kv.key;
    if (k == "w_ff") {
        params.w_ff = parse_double(kv, source);
    } else if (k == "alpha_ff") {
        params.alpha_ff = parse_double(kv, source);
    } else if (k == "w_bnd") {
        params.w_bnd = parse_double(kv, source);
    } else if (k == "w_iou") {
        params.w_iou = parse_double(kv, source);
    } else if (k == "w_loc") {
        params.w_loc = parse_double(kv, source);
    } else if (k == "alpha_bnd") {
        params.alpha_bnd = parse_double(kv, source);
    } else if (k == "join_threshold") {
        params.join_threshold = parse_double(kv, source);
    } else if (k == "boundary_length_weighting") {
        params.boundary_length_weighting = parse_bool(kv, source);
    } else if (k == "fallback_gap_penalty") {
        params.fallback_gap_penalty = parse_double(kv, source);
    } else if (k == "max_detections") {
        params.max_detections = static_cast<int>(std::clamp(parse_integer(kv, source), -1LL, 1'000'000LL));
    } else if (k == "anchor_score") {
        if (kv.value == "auto") {
            params.anchor_score.reset();
        } else {
            params.anchor_score = parse_double(kv, source);
        }
    } else if (k == "predecessor_horizon") {
        params.predecessor_horizon = static_cast<int>(std::clamp(parse_integer(kv, source), -1LL, 1'000'000'000LL));
    } else {
        throw ConfigError(source + ":" + std::to_string(kv.line) + ": unknown key '" + k + "'");
    }
}

Hyperparams load_config(std::istream& in, const std::string& source) {
    Hyperparams params;
    for (const KeyValue& kv : read_key_values(in, source)) {
        apply_config_value(params, kv, source);
    }
    try {
        params.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return params;
}

Hyperparams load_config(const std::filesystem::path& path) {
    auto in = open_input(path);
    return load_config(in, path.string());
}

std::string format_config(const Hyperparams& p) {
    std::ostringstream out;
    out << "w_ff = " << format_number(p.w_ff) << '\n'
        << "alpha_ff = " << format_number(p.alpha_ff) << '\n'
        << "w_bnd = " << format_number(p.w_bnd) << '\n'
        << "w_iou = " << format_number(p.w_iou) << '\n'
        << "w_loc = " << format_number(p.w_loc) << '\n'
        << "alpha_bnd = " << format_number(p.alpha_bnd) << '\n'
        << "join_threshold = " << format_number(p.join_threshold) << '\n'
        << "boundary_length_weighting = " << (p.boundary_length_weighting ? "true" : "false") << '\n'
        << "fallback_gap_penalty = " << format_number(p.fallback_gap_penalty) << '\n'
        << "max_detections = " << p.max_detections << '\n'
        << "anchor_score = " << (p.anchor_score ? format_number(*p.anchor_score) : std::string("auto")) << '\n'
        << "predecessor_horizon = " << p.predecessor_horizon << '\n';
    return out.str();
}

void write_config(const std::filesystem::path& path, const Hyperparams& params) {
    auto out = open_output(path);
    out << format_config(params);
    finish_output(out, path);
}

}  // namespace boltrack::io
