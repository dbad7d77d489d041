#include "vsub/orbifold.hpp"

#include <cmath>
#include <numeric>

#include "vsub/sampling.hpp"

namespace vsub {

namespace {

Matd identity(int m) {
  Matd I(m, m);
  for (int i = 0; i < m; ++i) I(i, i) = 1.0;
  return I;
}

double frob_dist(const Matd& a, const Matd& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    double d = a.a[i] - b.a[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

GroupAction cyclic_action(int n, const std::vector<int>& weights, ChartPtr chart) {
  if (n < 1) throw std::invalid_argument("cyclic_action: order must be >= 1");
  const int m = chart->dim();
  if (2 * static_cast<int>(weights.size()) > m)
    throw std::invalid_argument("cyclic_action: more weights than complex coordinate pairs");

  GroupAction a;
  a.chart = std::move(chart);
  for (int k = 0; k < n; ++k) {
    Matd g = identity(m);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      double ang = 2.0 * 3.14159265358979323846 * weights[j] * k / n;
      double c = std::cos(ang), s = std::sin(ang);
      g(2 * j, 2 * j) = c;
      g(2 * j, 2 * j + 1) = -s;
      g(2 * j + 1, 2 * j) = s;
      g(2 * j + 1, 2 * j + 1) = c;
    }
    a.elements.push_back(std::move(g));
    a.labels.push_back(k == 0 ? "id" : "gamma^" + std::to_string(k));
  }
  return a;
}

std::pair<long, long> bezout(long p, long q) {
  if (p < 1 || q < 1) throw std::invalid_argument("bezout: arguments must be positive");
  if (std::gcd(p, q) != 1) throw std::invalid_argument("bezout: arguments must be coprime");
  if (q == 1) return {1, p - 1};
  // a = p^{-1} mod q via extended Euclid
  long a = 0, newa = 1, r = q, newr = p % q;
  while (newr != 0) {
    long quo = r / newr;
    long t = a - quo * newa;
    a = newa;
    newa = t;
    t = r - quo * newr;
    r = newr;
    newr = t;
  }
  if (r != 1) throw std::logic_error("bezout: inverse failed");
  a = ((a % q) + q) % q;
  if (a == 0) a = q;
  long b = (a * p - 1) / q;
  return {a, b};
}

FixedPointData fixed_point_data(const Matd& gamma, double tol) {
  const int m = gamma.rows;
  Matd d = gamma;
  for (int i = 0; i < m; ++i) d(i, i) -= 1.0;
  auto kernel = kernel_basis(d, tol);
  FixedPointData out;
  out.fixed_dim = static_cast<int>(kernel.size());
  out.codim = m - out.fixed_dim;

  Matd p = gamma;
  out.element_order = 1;
  while (frob_dist(p, identity(m)) > tol) {
    p = mat_mul(p, gamma);
    ++out.element_order;
    if (out.element_order > 4096) throw std::domain_error("fixed_point_data: element order too large");
  }
  return out;
}

int isotropy_order(const GroupAction& a, std::span<const double> x, double tol) {
  int count = 0;
  for (const auto& g : a.elements) {
    double worst = 0;
    for (int i = 0; i < g.rows; ++i) {
      double s = 0;
      for (int j = 0; j < g.cols; ++j) s += g(i, j) * x[j];
      worst = std::max(worst, std::abs(s - x[i]));
    }
    if (worst <= tol) ++count;
  }
  return count;
}

double group_axioms_residual(const GroupAction& a) {
  const int n = a.order();
  const int m = a.dim();
  double worst = frob_dist(a.elements[0], identity(m));
  for (int i = 0; i < n; ++i) {
    // closure: product lands on some element; inverse: some product gives id
    double best_inv = 1e300;
    for (int j = 0; j < n; ++j) {
      Matd prod = mat_mul(a.elements[i], a.elements[j]);
      double best = 1e300;
      for (int k = 0; k < n; ++k) best = std::min(best, frob_dist(prod, a.elements[k]));
      worst = std::max(worst, best);
      best_inv = std::min(best_inv, frob_dist(prod, identity(m)));
    }
    worst = std::max(worst, best_inv);
  }
  return worst;
}

double isometry_residual(const GroupAction& a, int npoints, std::uint64_t seed) {
  auto pts = sample_orbit_points(a, npoints, seed);
  double worst = 0;
  const int m = a.dim();
  for (const auto& x : pts) {
    Matd gx = a.chart->metric_at(x);
    for (const auto& g : a.elements) {
      Point y(m, 0.0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) y[i] += g(i, j) * x[j];
      Matd gy = a.chart->metric_at(y);
      // gamma^T g(gamma x) gamma vs g(x)
      Matd t(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double s = 0;
          for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) s += g(k, i) * gy(k, l) * g(l, j);
          t(i, j) = s;
        }
      worst = std::max(worst, frob_dist(t, gx));
    }
  }
  return worst;
}

std::vector<Point> sample_orbit_points(const GroupAction& a, int n, std::uint64_t seed) {
  const int m = a.dim();
  return sample_points(*a.chart, n, seed, [&](const Point& x) {
    for (const auto& g : a.elements) {
      Point y(m, 0.0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) y[i] += g(i, j) * x[j];
      if (!a.chart->admissible(y)) return false;
    }
    return true;
  });
}

ResidualSeries invariance_residual(const GroupAction& a, const FormField& phi,
                                   const std::vector<Point>& pts) {
  const int m = a.dim();
  ResidualSeries out;
  for (const auto& x : pts) {
    MultiIndexForm here = phi.eval(x);
    double worst = 0;
    for (const auto& g : a.elements) {
      Point y(m, 0.0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) y[i] += g(i, j) * x[j];
      MultiIndexForm there = phi.eval(y);
      // pullback along gamma: rows are images of the basis vectors
      std::vector<std::vector<double>> A(m, std::vector<double>(m));
      for (int c = 0; c < m; ++c)
        for (int k = 0; k < m; ++k) A[c][k] = g(k, c);
      MultiIndexForm pulled = pullback_linear(A, there);
      worst = std::max(worst, norm(pulled - here));
    }
    out.residuals.push_back(worst);
    if (worst >= out.max_residual) {
      out.max_residual = worst;
      out.argmax = x;
    }
  }
  double s = 0;
  for (double r : out.residuals) s += r;
  out.mean_residual = out.residuals.empty() ? 0.0 : s / out.residuals.size();
  return out;
}

ResidualSeries equivariance_residual(const GroupAction& upstairs, const GroupAction& downstairs,
                                     const std::vector<ScalarField>& map,
                                     const std::vector<Point>& pts) {
  if (upstairs.order() != downstairs.order())
    throw std::invalid_argument("equivariance: group order mismatch");
  const int mz = upstairs.dim();
  const int my = downstairs.dim();
  if (static_cast<int>(map.size()) != my)
    throw std::invalid_argument("equivariance: map component count mismatch");

  auto eval_map = [&](const Point& x) {
    JetVec seeds = seed_point(x, 1);
    Point y(my);
    for (int a = 0; a < my; ++a) y[a] = map[a](seeds).value();
    return y;
  };

  ResidualSeries out;
  for (const auto& z : pts) {
    Point hz = eval_map(z);
    double worst = 0;
    for (int k = 0; k < upstairs.order(); ++k) {
      const Matd& A = upstairs.elements[k];
      const Matd& B = downstairs.elements[k];
      Point az(mz, 0.0);
      for (int i = 0; i < mz; ++i)
        for (int j = 0; j < mz; ++j) az[i] += A(i, j) * z[j];
      Point lhs = eval_map(az);
      Point rhs(my, 0.0);
      for (int i = 0; i < my; ++i)
        for (int j = 0; j < my; ++j) rhs[i] += B(i, j) * hz[j];
      double d = 0;
      for (int i = 0; i < my; ++i) d = std::max(d, std::abs(lhs[i] - rhs[i]));
      worst = std::max(worst, d);
    }
    out.residuals.push_back(worst);
    if (worst >= out.max_residual) {
      out.max_residual = worst;
      out.argmax = z;
    }
  }
  double s = 0;
  for (double r : out.residuals) s += r;
  out.mean_residual = out.residuals.empty() ? 0.0 : s / out.residuals.size();
  return out;
}

std::vector<ScalarField> hopf_ambient_map() {
  return {
      [](const JetVec& x) { return 2.0 * (x[0] * x[2] + x[1] * x[3]); },
      [](const JetVec& x) { return 2.0 * (x[1] * x[2] - x[0] * x[3]); },
      [](const JetVec& x) { return x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3]; },
  };
}

ChartPtr ambient_chart(int m, double half_width) {
  Box b;
  b.lo.assign(m, -half_width);
  b.hi.assign(m, half_width);
  MetricField metric = [m](const JetVec&) {
    Mat<Jet> g(m, m);
    for (int i = 0; i < m; ++i) g(i, i) = Jet(1.0);
    return g;
  };
  auto chart = std::make_shared<MetricChart>(m, b, metric);
  chart->add_exclusion(
      ExclusionZone{"origin", m, [](std::span<const double> x) {
                      double s = 0;
                      for (double v : x) s += v * v;
                      return std::sqrt(s);
                    }});
  return chart;
}

FormField ambient_nu2(ChartPtr chart3) {
  if (chart3->dim() != 3) throw std::invalid_argument("ambient_nu2: needs a 3d chart");
  auto r3 = [](const JetVec& x) {
    Jet r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return r2 * sqrt(r2);
  };
  std::map<Mask, ScalarField> coeffs;
  coeffs.emplace(tuple_to_mask({2, 3}, 3),
                 [r3](const JetVec& x) { return 0.25 * x[0] * reciprocal(r3(x)); });
  coeffs.emplace(tuple_to_mask({1, 3}, 3),
                 [r3](const JetVec& x) { return -0.25 * x[1] * reciprocal(r3(x)); });
  coeffs.emplace(tuple_to_mask({1, 2}, 3),
                 [r3](const JetVec& x) { return 0.25 * x[2] * reciprocal(r3(x)); });
  return FormField(chart3, 2, std::move(coeffs));
}

}  // namespace vsub
