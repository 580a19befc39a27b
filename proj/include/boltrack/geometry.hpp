#pragma once

#include <compare>

namespace boltrack {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box in continuous pixel units, stored as left/top/width/height.
/// Construction rejects zero-area, negative or non-finite boxes with GeometryError,
/// so every live instance satisfies w > 0 and h > 0.
class BoundingBox {
public:
    BoundingBox(double x, double y, double w, double h);

    /// Builds a box from corner coordinates (x1, y1) top-left, (x2, y2) bottom-right.
    static BoundingBox from_corners(double x1, double y1, double x2, double y2);

    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }
    double w() const noexcept { return w_; }
    double h() const noexcept { return h_; }
    double right() const noexcept { return x_ + w_; }
    double bottom() const noexcept { return y_ + h_; }
    double area() const noexcept { return w_ * h_; }
    Point center() const noexcept { return {x_ + w_ / 2.0, y_ + h_ / 2.0}; }

    bool operator==(const BoundingBox&) const = default;

private:
    double x_;
    double y_;
    double w_;
    double h_;
};

/// Intersection over union; 0 for disjoint or edge-touching boxes.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

double aspect_ratio(const BoundingBox& b) noexcept;

/// Euclidean distance between box centers, in pixels.
double center_distance(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Aspect-ratio similarity to the first-frame box minus alpha_ff.
/// The similarity term is in (0, 1] and equals 1 only for equal aspect ratios.
double ff_score(const BoundingBox& b_ff, const BoundingBox& b, double alpha_ff) noexcept;

}  // namespace boltrack
