#include <boltrack/geometry.hpp>

#include <boltrack/errors.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace boltrack {

BoundingBox::BoundingBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
        throw GeometryError("bounding box has non-finite coordinates");
    }
    if (!(w > 0.0) || !(h > 0.0)) {
        std::ostringstream msg;
        msg << "bounding box must have positive width and height, got w=" << w << " h=" << h;
        throw GeometryError(msg.str());
    }
}

BoundingBox BoundingBox::from_corners(double x1, double y1, double x2, double y2) {
    return BoundingBox(x1, y1, x2 - x1, y2 - y1);
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    // Areas are measured from the same edge coordinates as the intersection so
    // that identical boxes give exactly 1.
    const double area_a = (a.right() - a.x()) * (a.bottom() - a.y());
    const double area_b = (b.right() - b.x()) * (b.bottom() - b.y());
    const double inter = iw * ih;
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double aspect_ratio(const BoundingBox& b) noexcept {
    return b.w() / b.h();
}

double center_distance(const BoundingBox& a, const BoundingBox& b) noexcept {
    const Point ca = a.center();
    const Point cb = b.center();
    return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

double ff_score(const BoundingBox& b_ff, const BoundingBox& b, double alpha_ff) noexcept {
    const double r_ff = aspect_ratio(b_ff);
    const double r = aspect_ratio(b);
    return std::min(r_ff / r, r / r_ff) - alpha_ff;
}

}  // namespace boltrack
