#include <boltrack/metrics.hpp>

#include <boltrack/errors.hpp>
#include <boltrack/io.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>

namespace boltrack::metrics {

namespace {

void require_aligned(const TrackResult& pred, const GroundTruth& gt) {
    if (pred.size() != gt.size()) {
        throw StructuralError("track has " + std::to_string(pred.size()) + " frames but ground truth has " +
                              std::to_string(gt.size()));
    }
}

double frame_iou(const TrackEntry& e, const std::optional<BoundingBox>& gt) {
    if (!e.box || !gt) {
        return 0.0;
    }
    return iou(*e.box, *gt);
}

constexpr int kSuccessSamples = 101;
constexpr int kPrecisionSamples = 51;

}  // namespace

double f_score(double precision, double recall) {
    const double sum = precision + recall;
    if (sum <= 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / sum;
}

double j_box(const TrackResult& pred, const GroundTruth& gt) {
    require_aligned(pred, gt);
    double total = 0.0;
    std::size_t present = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        if (gt.boxes[t]) {
            total += frame_iou(pred.entries[t], gt.boxes[t]);
            ++present;
        }
    }
    return present == 0 ? 0.0 : total / static_cast<double>(present);
}

LongTermCurve long_term_curve(const TrackResult& pred, const GroundTruth& gt) {
    require_aligned(pred, gt);
    struct Scored {
        double confidence;
        double overlap;
        bool gt_present;
    };
    std::vector<Scored> scored;
    std::size_t gt_present = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        if (gt.boxes[t]) {
            ++gt_present;
        }
        const TrackEntry& e = pred.entries[t];
        if (e.box) {
            scored.push_back({e.confidence, frame_iou(e, gt.boxes[t]), gt.boxes[t].has_value()});
        }
    }
    // Descending confidence; a sweep from the top accumulates the ">= threshold" sets.
    std::stable_sort(scored.begin(), scored.end(),
              [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });

    LongTermCurve curve;
    double overlap_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        overlap_sum += scored[i].overlap;
        if (scored[i].gt_present) {
            recall_sum += scored[i].overlap;
        }
        ++count;
        const bool last_of_value = i + 1 == scored.size() || scored[i + 1].confidence != scored[i].confidence;
        if (!last_of_value) {
            continue;
        }
        LongTermPoint p;
        p.threshold = scored[i].confidence;
        p.precision = overlap_sum / static_cast<double>(count);
        p.recall = gt_present == 0 ? 0.0 : recall_sum / static_cast<double>(gt_present);
        p.f = f_score(p.precision, p.recall);
        curve.points.push_back(p);
    }
    std::reverse(curve.points.begin(), curve.points.end());
    for (const LongTermPoint& p : curve.points) {
        curve.max_f = std::max(curve.max_f, p.f);
    }
    return curve;
}

OtbCurves otb_curves(const TrackResult& pred, const GroundTruth& gt) {
    require_aligned(pred, gt);
    if (gt.size() == 0) {
        throw StructuralError("empty ground truth");
    }
    std::vector<double> overlaps;
    std::vector<double> errors;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        if (!gt.boxes[t]) {
            throw StructuralError("short-term evaluation needs ground truth on every frame; frame " +
                                  std::to_string(t) + " is absent");
        }
        const TrackEntry& e = pred.entries[t];
        overlaps.push_back(frame_iou(e, gt.boxes[t]));
        errors.push_back(e.box ? center_distance(*e.box, *gt.boxes[t]) : std::numeric_limits<double>::infinity());
    }
    const auto n = static_cast<double>(gt.size());

    OtbCurves curves;
    double auc = 0.0;
    for (int i = 0; i < kSuccessSamples; ++i) {
        const double threshold = static_cast<double>(i) / 100.0;
        const auto hits = std::count_if(overlaps.begin(), overlaps.end(), [&](double o) { return o > threshold; });
        const double rate = static_cast<double>(hits) / n;
        curves.success.push_back({threshold, rate});
        auc += rate;
    }
    curves.success_auc = auc / kSuccessSamples;
    for (int px = 0; px < kPrecisionSamples; ++px) {
        const double threshold = static_cast<double>(px);
        const auto hits = std::count_if(errors.begin(), errors.end(), [&](double d) { return d <= threshold; });
        curves.precision.push_back({threshold, static_cast<double>(hits) / n});
    }
    curves.precision_at_20 = curves.precision[20].rate;
    return curves;
}

Mode parse_mode(const std::string& name) {
    if (name == "vos") {
        return Mode::vos;
    }
    if (name == "lt") {
        return Mode::lt;
    }
    if (name == "otb") {
        return Mode::otb;
    }
    throw ConfigError("unknown evaluation mode '" + name + "' (expected vos, lt or otb)");
}

EvalReport evaluate(const TrackResult& pred, const GroundTruth& gt, Mode mode) {
    EvalReport report;
    report.j_box = j_box(pred, gt);
    if (mode == Mode::lt) {
        report.long_term = long_term_curve(pred, gt);
    } else if (mode == Mode::otb) {
        report.otb = otb_curves(pred, gt);
    }
    return report;
}

EvalReport summarize(std::span<const EvalReport> reports) {
    if (reports.empty()) {
        throw StructuralError("cannot summarize an empty list of reports");
    }
    const auto n = static_cast<double>(reports.size());
    const bool has_lt = reports.front().long_term.has_value();
    const bool has_otb = reports.front().otb.has_value();
    for (const EvalReport& r : reports) {
        if (r.long_term.has_value() != has_lt || r.otb.has_value() != has_otb) {
            throw StructuralError("cannot summarize reports from different evaluation modes");
        }
    }
    if (reports.size() == 1) {
        return reports.front();
    }

    EvalReport out;
    for (const EvalReport& r : reports) {
        out.j_box += r.j_box / n;
    }
    if (has_lt) {
        out.long_term = LongTermCurve{};
        for (const EvalReport& r : reports) {
            out.long_term->max_f += r.long_term->max_f / n;
        }
    }
    if (has_otb) {
        OtbCurves c = reports.front().otb.value();
        for (auto& p : c.success) {
            p.rate = 0.0;
        }
        for (auto& p : c.precision) {
            p.rate = 0.0;
        }
        c.success_auc = 0.0;
        c.precision_at_20 = 0.0;
        for (const EvalReport& r : reports) {
            for (std::size_t i = 0; i < c.success.size(); ++i) {
                c.success[i].rate += r.otb->success[i].rate / n;
            }
            for (std::size_t i = 0; i < c.precision.size(); ++i) {
                c.precision[i].rate += r.otb->precision[i].rate / n;
            }
            c.success_auc += r.otb->success_auc / n;
            c.precision_at_20 += r.otb->precision_at_20 / n;
        }
        out.otb = std::move(c);
    }
    return out;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["j_box"] = report.j_box;
    if (report.long_term) {
        nlohmann::ordered_json lt;
        lt["max_f"] = report.long_term->max_f;
        lt["curve"] = nlohmann::json::array();
        for (const LongTermPoint& p : report.long_term->points) {
            lt["curve"].push_back({p.threshold, p.precision, p.recall, p.f});
        }
        doc["long_term"] = std::move(lt);
    }
    if (report.otb) {
        nlohmann::ordered_json otb;
        otb["success_auc"] = report.otb->success_auc;
        otb["precision_at_20"] = report.otb->precision_at_20;
        otb["success"] = nlohmann::json::array();
        for (const CurvePoint& p : report.otb->success) {
            otb["success"].push_back({p.threshold, p.rate});
        }
        otb["precision"] = nlohmann::json::array();
        for (const CurvePoint& p : report.otb->precision) {
            otb["precision"].push_back({p.threshold, p.rate});
        }
        doc["otb"] = std::move(otb);
    }
    return doc.dump(2) + "\n";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out.flush()) {
        throw IoError("failed writing " + path.string());
    }
}

std::string curve_csv(const char* header, const std::vector<CurvePoint>& points) {
    std::string text = std::string(header) + "\n";
    for (const CurvePoint& p : points) {
        text += io::format_number(p.threshold) + "," + io::format_number(p.rate) + "\n";
    }
    return text;
}

}  // namespace

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    write_text(dir / "report.json", report_json(report));
    if (report.long_term) {
        std::string text = "threshold,precision,recall,f\n";
        for (const LongTermPoint& p : report.long_term->points) {
            text += io::format_number(p.threshold) + "," + io::format_number(p.precision) + "," +
                    io::format_number(p.recall) + "," + io::format_number(p.f) + "\n";
        }
        write_text(dir / "lt_curve.csv", text);
    }
    if (report.otb) {
        write_text(dir / "success.csv", curve_csv("overlap_threshold,success_rate", report.otb->success));
        write_text(dir / "precision.csv", curve_csv("pixel_threshold,precision_rate", report.otb->precision));
    }
}

}  // namespace boltrack::metrics
