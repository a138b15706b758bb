#pragma once

#include <array>
#include <functional>
#include <vector>

#include "crmlab/geometry.hpp"
#include "crmlab/quadrature.hpp"

namespace crm::numerics {

using SpatialIntegrand = std::function<double(const Point&)>;
using AxisBreaks = std::array<std::vector<double>, kMaxDim>;

/// Tensorized adaptive integration of f over a box, splitting each axis at `breaks`.
QuadratureResult integrate_box(const SpatialIntegrand& f, const Window& box, const AxisBreaks& breaks = {},
                               const QuadratureOptions& options = {});

/// Sorted, de-duplicated split points of [lo, hi]: the ends plus every break strictly inside.
std::vector<double> split_points(double lo, double hi, const std::vector<double>& breaks);

}  // namespace crm::numerics
