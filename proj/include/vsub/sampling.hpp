#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vsub/chart.hpp"
#include "vsub/rng.hpp"

namespace vsub {

/// Deterministic rejection sampling: uniform in the chart box, rejecting
/// points within the boundary margin or within 1e-2 of an excluded set.
/// Optional extra predicate for model-level admissibility (e.g. projected
/// point admissible downstairs).  Throws after 100*N failed attempts.
std::vector<Point> sample_points(const MetricChart& chart, int n, std::uint64_t seed,
                                 const std::function<bool(const Point&)>& extra = {});

}  // namespace vsub
