#include "vsub/rayleigh.hpp"

#include <cmath>

#include "vsub/calculus.hpp"
#include "vsub/parallel.hpp"
#include "vsub/rng.hpp"

namespace vsub {

namespace {

double nth_uniform(std::uint64_t seed, std::uint64_t index, double lo, double hi) {
  std::uint64_t z = CounterRng::mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ull);
  return lo + (hi - lo) * (static_cast<double>(z >> 11) * 0x1.0p-53);
}

}  // namespace

RayleighEstimate monte_carlo_rayleigh(const MetricChart& chart, int degree,
                                      const FormEvaluator& phi, long n, std::uint64_t seed,
                                      int threads) {
  if (n < 2) throw std::invalid_argument("monte_carlo_rayleigh: need at least two samples");
  const int m = chart.dim();
  const Box& box = chart.sample_box();

  std::vector<double> num(n, 0.0), den(n, 0.0);

  parallel_for(n, threads, [&](long i) {
    Point x(m);
    for (int v = 0; v < m; ++v)
      x[v] = nth_uniform(seed, static_cast<std::uint64_t>(i) * m + v, box.lo[v], box.hi[v]);
    if (!chart.admissible(x)) return;  // excluded margin: measure-zero bias

    JetVec seeds = seed_point(x, 2);
    MetricJets M = metric_jets(chart, seeds);
    FormJets F = phi(seeds);

    auto cf = orthonormal_coframe(chart, x);
    auto on_norm2 = [&](const MultiIndexForm& a) {
      auto b = to_orthonormal(cf, a);
      return inner(b, b);
    };

    double nd2 = 0.0, ndelta2 = 0.0;
    if (degree < m) {
      MultiIndexForm d = form_values(d_jets(F, degree, m), degree + 1, m);
      nd2 = on_norm2(d);
    }
    if (degree > 0) {
      MultiIndexForm del = form_values(delta_jets(F, degree, m, M), degree - 1, m);
      ndelta2 = on_norm2(del);
    }
    MultiIndexForm val = form_values(F, degree, m);
    double nv2 = on_norm2(val);

    double w = std::sqrt(M.det.value());
    num[i] = (nd2 + ndelta2) * w;
    den[i] = nv2 * w;
  });

  double sa = 0, sb = 0;
  long used = 0;
  for (long i = 0; i < n; ++i) {
    sa += num[i];
    sb += den[i];
    if (den[i] != 0.0 || num[i] != 0.0) ++used;
  }
  if (sb == 0.0) throw std::domain_error("monte_carlo_rayleigh: zero denominator");
  double mean_b = sb / n;
  double R = sa / sb;

  // delta-method variance of the ratio: var(a - R b) / (n * mean(b)^2)
  double s2 = 0;
  for (long i = 0; i < n; ++i) {
    double d = num[i] - R * den[i];
    s2 += d * d;
  }
  s2 /= (n - 1);
  RayleighEstimate out;
  out.estimate = R;
  out.stderror = std::sqrt(s2 / n) / mean_b;
  out.samples = n;
  out.used = used;
  return out;
}

RayleighEstimate monte_carlo_rayleigh(const FormField& phi, long n, std::uint64_t seed,
                                      int threads) {
  return monte_carlo_rayleigh(
      *phi.chart(), phi.degree(), [&phi](const JetVec& x) { return phi.eval_jets(x); }, n, seed,
      threads);
}

RayleighEstimate monte_carlo_rayleigh_pullback(const ModelPtr& model, const FormField& phi,
                                               long n, std::uint64_t seed, int threads) {
  const SubmersionModel* m = model.get();
  const FormField* p = &phi;
  return monte_carlo_rayleigh(
      *model->total(), phi.degree(),
      [m, p](const JetVec& z) { return pullback_form_jets(*m, *p, z); }, n, seed, threads);
}

}  // namespace vsub
