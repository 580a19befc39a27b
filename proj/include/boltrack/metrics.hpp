#pragma once

#include <boltrack/model.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boltrack::metrics {

struct LongTermPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

struct LongTermCurve {
    std::vector<LongTermPoint> points;  // ascending threshold
    double max_f = 0.0;
};

struct CurvePoint {
    double threshold = 0.0;
    double rate = 0.0;
};

struct OtbCurves {
    std::vector<CurvePoint> success;    // overlap thresholds 0, 0.01, ..., 1
    double success_auc = 0.0;
    std::vector<CurvePoint> precision;  // pixel thresholds 0, 1, ..., 50
    double precision_at_20 = 0.0;
};

struct EvalReport {
    double j_box = 0.0;
    std::optional<LongTermCurve> long_term;
    std::optional<OtbCurves> otb;
};

/// F = 2 Pr Re / (Pr + Re), 0 when both are 0.
double f_score(double precision, double recall);

/// Mean IoU over GT-present frames; an absent prediction scores 0 there.
double j_box(const TrackResult& pred, const GroundTruth& gt);

/// Long-term precision/recall/F over every distinct prediction confidence.
///
/// For threshold c, the predictions considered are the present ones with
/// confidence >= c. Precision is their mean IoU with the ground truth (0 on
/// GT-absent frames). Recall sums the same IoUs over GT-present frames and
/// divides by the number of GT-present frames.
LongTermCurve long_term_curve(const TrackResult& pred, const GroundTruth& gt);

/// Short-term success (IoU > t) and precision (center error <= px) curves.
/// GT must be present on every frame; absent predictions have IoU 0 and
/// infinite center error.
OtbCurves otb_curves(const TrackResult& pred, const GroundTruth& gt);

enum class Mode { vos, lt, otb };
Mode parse_mode(const std::string& name);

EvalReport evaluate(const TrackResult& pred, const GroundTruth& gt, Mode mode);

/// Dataset-level report: unweighted mean of scalars across sequences; success
/// and precision curves averaged pointwise. Long-term curves use
/// sequence-specific thresholds, so the summary keeps only the mean max_f.
EvalReport summarize(std::span<const EvalReport> reports);

std::string report_json(const EvalReport& report);

/// Writes report.json plus lt_curve.csv / success.csv / precision.csv for
/// whichever sections the report carries.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace boltrack::metrics
