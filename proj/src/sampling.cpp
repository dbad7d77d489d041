#include "vsub/sampling.hpp"

#include <stdexcept>

namespace vsub {

std::vector<Point> sample_points(const MetricChart& chart, int n, std::uint64_t seed,
                                 const std::function<bool(const Point&)>& extra) {
  if (n < 1) throw std::invalid_argument("sample_points: need at least one point");
  CounterRng rng(seed);
  const Box& box = chart.sample_box();
  const int m = chart.dim();
  std::vector<Point> out;
  out.reserve(n);
  long attempts = 0;
  const long cap = 100L * n;
  Point x(m);
  while (static_cast<int>(out.size()) < n) {
    if (++attempts > cap)
      throw std::runtime_error("sample_points: rejection cap exceeded (degenerate chart)");
    for (int i = 0; i < m; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    if (!box.contains(x, chart.boundary_margin())) continue;
    bool ok = true;
    for (const auto& z : chart.excluded())
      if (z.gauge(x) <= kExclusionMargin) {
        ok = false;
        break;
      }
    if (!ok) continue;
    if (extra && !extra(x)) continue;
    out.push_back(x);
  }
  return out;
}

}  // namespace vsub
