#include "crmlab/spatial.hpp"

#include <algorithm>

namespace crm::numerics {

std::vector<double> split_points(double lo, double hi, const std::vector<double>& breaks) {
    std::vector<double> pts{lo};
    for (const double b : breaks) {
        if (b > lo && b < hi) {
            pts.push_back(b);
        }
    }
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

namespace {

QuadratureResult integrate_axis(const SpatialIntegrand& f, const Window& box, const AxisBreaks& breaks,
                                const QuadratureOptions& options, Point& x, std::size_t axis) {
    const auto pts = split_points(box.lower()[axis], box.upper()[axis], breaks[axis]);
    if (axis + 1 == box.dim()) {
        return integrate_pieces(
            [&](double t) {
                x[axis] = t;
                return f(x);
            },
            pts, options);
    }
    QuadratureOptions inner = options;
    inner.abs_tol = options.abs_tol / (box.upper()[axis] - box.lower()[axis]);
    bool inner_ok = true;
    QuadratureResult r = integrate_pieces(
        [&](double t) {
            x[axis] = t;
            const QuadratureResult in = integrate_axis(f, box, breaks, inner, x, axis + 1);
            inner_ok = inner_ok && in.converged;
            return in.value;
        },
        pts, options);
    r.converged = r.converged && inner_ok;
    return r;
}

}  // namespace

QuadratureResult integrate_box(const SpatialIntegrand& f, const Window& box, const AxisBreaks& breaks,
                               const QuadratureOptions& options) {
    Point x = Point::zeros(box.dim());
    return integrate_axis(f, box, breaks, options, x, 0);
}

}  // namespace crm::numerics
