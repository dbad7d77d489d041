#include "vsub/models.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "vsub/sampling.hpp"

namespace vsub {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Box cube(int m, double half) {
  Box b;
  b.lo.assign(m, -half);
  b.hi.assign(m, half);
  return b;
}

Jet norm2(const JetVec& x, int from = 0, int to = -1) {
  Jet s;
  int n = to < 0 ? static_cast<int>(x.size()) : to;
  for (int i = from; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace

ChartPtr euclidean_chart(int m, double half_width) {
  MetricField metric = [m](const JetVec&) {
    Mat<Jet> g(m, m);
    for (int i = 0; i < m; ++i) g(i, i) = Jet(1.0);
    return g;
  };
  return std::make_shared<MetricChart>(m, cube(m, half_width), metric);
}

ChartPtr sphere_model(int m, double r, bool south, double box_half) {
  MetricField metric = [m, r](const JetVec& u) {
    Jet lam = 4.0 * r * r * reciprocal((1.0 + norm2(u)) * (1.0 + norm2(u)));
    Mat<Jet> g(m, m);
    for (int i = 0; i < m; ++i) g(i, i) = lam;
    return g;
  };
  auto chart = std::make_shared<MetricChart>(m, cube(m, box_half), metric);
  chart->set_domain_unbounded();

  std::vector<ScalarField> embed;
  for (int i = 0; i < m; ++i)
    embed.push_back([i, r](const JetVec& u) { return 2.0 * r * u[i] * reciprocal(1.0 + norm2(u)); });
  embed.push_back([r, south](const JetVec& u) {
    Jet h = r * (norm2(u) - 1.0) * reciprocal(1.0 + norm2(u));
    return south ? -h : h;
  });
  chart->set_embedding(std::move(embed));
  return chart;
}

ChartPtr polar_sphere_chart(double r) {
  Box b;
  b.lo = {0.0, 0.0};
  b.hi = {3.14159265358979323846, kTwoPi};
  MetricField metric = [r](const JetVec& x) {
    Mat<Jet> g(2, 2);
    g(0, 0) = Jet(r * r);
    Jet s = sin(x[0]);
    g(1, 1) = r * r * s * s;
    return g;
  };
  auto chart = std::make_shared<MetricChart>(2, b, metric);
  chart->set_boundary_margin(5e-2);  // metric degenerates at the poles
  std::vector<ScalarField> embed = {
      [r](const JetVec& x) { return r * sin(x[0]) * cos(x[1]); },
      [r](const JetVec& x) { return r * sin(x[0]) * sin(x[1]); },
      [r](const JetVec& x) { return r * cos(x[0]); }};
  chart->set_embedding(std::move(embed));
  return chart;
}

ChartPtr circle_chart() {
  // one shared instance: fiber products require literal base-chart identity
  static const ChartPtr instance = [] {
    Box b;
    b.lo = {0.0};
    b.hi = {kTwoPi};
    MetricField metric = [](const JetVec&) {
      Mat<Jet> g(1, 1);
      g(0, 0) = Jet(1.0);
      return g;
    };
    return std::make_shared<MetricChart>(1, b, metric);
  }();
  return instance;
}

namespace {

// Hermitian Fubini-Study data in affine coordinates, real form.
// h_jk = [(1+|w|^2) delta_jk - conj(w_j) w_k] / (1+|w|^2)^2 = A + iB, and for
// real tangent vectors (with w_j = u_j + i v_j interleaved) the metric is
//   g(2j,2k) = g(2j+1,2k+1) = A_jk,  g(2j,2k+1) = B_jk = -g(2j+1,2k),
// while the Kaehler form kappa(X,Y) = g(JX,Y) has
//   k(2j,2k) = k(2j+1,2k+1) = -B_jk,  k(2j,2k+1) = A_jk = -k(2j+1,2k).
struct FsEntries {
  Jet A(const JetVec& w, int j, int k) const {
    Jet D = 1.0 + norm2(w);
    Jet num = -(w[2 * j] * w[2 * k] + w[2 * j + 1] * w[2 * k + 1]);
    if (j == k) num += D;
    return num * reciprocal(D * D);
  }
  Jet B(const JetVec& w, int j, int k) const {
    Jet D = 1.0 + norm2(w);
    Jet num = w[2 * j + 1] * w[2 * k] - w[2 * j] * w[2 * k + 1];
    return num * reciprocal(D * D);
  }
};

}  // namespace

ChartPtr fubini_study_chart(int n) {
  const int m = 2 * n;
  MetricField metric = [n, m](const JetVec& w) {
    FsEntries fs;
    Mat<Jet> g(m, m);
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        Jet a = fs.A(w, j, k);
        g(2 * j, 2 * k) = a;
        g(2 * j + 1, 2 * k + 1) = a;
        if (k > j) {
          g(2 * k, 2 * j) = a;
          g(2 * k + 1, 2 * j + 1) = a;
        }
        Jet b = fs.B(w, j, k);
        g(2 * j, 2 * k + 1) = b;
        g(2 * k + 1, 2 * j) = b;
        g(2 * j + 1, 2 * k) = -b;
        g(2 * k, 2 * j + 1) = -b;
      }
    return g;
  };
  auto chart = std::make_shared<MetricChart>(m, cube(m, 2.0), metric);
  chart->set_domain_unbounded();
  return chart;
}

FormField volume_form(ChartPtr chart) {
  const int m = chart->dim();
  Mask top = (Mask{1} << m) - 1;
  std::map<Mask, ScalarField> coeffs;
  coeffs.emplace(top, [chart](const JetVec& x) {
    return sqrt(determinant(chart->metric_jets(x)));
  });
  return FormField(chart, m, std::move(coeffs));
}

FormField fs_kaehler_form(ChartPtr chart, int n) {
  const int m = 2 * n;
  if (chart->dim() != m) throw std::invalid_argument("fs_kaehler_form: dimension mismatch");
  std::map<Mask, ScalarField> coeffs;
  auto kappa = [](const JetVec& w, int r, int s) -> Jet {
    FsEntries fs;
    int j = r / 2, k = s / 2;
    bool rj = r % 2, sk = s % 2;
    if (!rj && !sk) return -fs.B(w, j, k);
    if (rj && sk) return -fs.B(w, j, k);
    if (!rj && sk) return fs.A(w, j, k);
    return -fs.A(w, j, k);
  };
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s) {
      Mask mask = (Mask{1} << r) | (Mask{1} << s);
      coeffs.emplace(mask, [kappa, r, s](const JetVec& w) { return kappa(w, r, s); });
    }
  return FormField(chart, 2, std::move(coeffs));
}

ScalarField embedded_polynomial(ChartPtr chart, std::vector<PolyTerm> poly) {
  if (chart->embedding().empty())
    throw std::invalid_argument("embedded_polynomial: chart has no embedding map");
  auto embed = chart->embedding();
  return [embed, poly = std::move(poly)](const JetVec& x) {
    JetVec p;
    p.reserve(embed.size());
    for (const auto& f : embed) p.push_back(f(x));
    Jet s;
    for (const auto& t : poly) {
      Jet mterm(t.coeff);
      for (std::size_t v = 0; v < t.exps.size(); ++v)
        for (int e = 0; e < t.exps[v]; ++e) mterm = mterm * p[v];
      s += mterm;
    }
    return s;
  };
}

// -- models ------------------------------------------------------------------

ModelPtr warped_torus_model(ScalarField f, std::string name) {
  Box b;
  b.lo = {0.0, 0.0};
  b.hi = {kTwoPi, kTwoPi};
  MetricField metric = [f](const JetVec& z) {
    Jet fy = f(JetVec{z[1]});
    if (fy.value() <= 0.0) throw std::domain_error("warped torus: fiber scale must be positive");
    Mat<Jet> g(2, 2);
    g(0, 0) = fy * fy;
    g(1, 1) = Jet(1.0);
    return g;
  };
  auto total = std::make_shared<MetricChart>(2, b, metric);
  ModelFlags flags;
  flags.bundle_form = true;
  flags.full_measure = true;
  flags.horizontal_integrable_expected = true;  // one-dimensional base
  return std::make_shared<SubmersionModel>(std::move(name), total, circle_chart(),
                                           std::vector<ScalarField>{coordinate_field(1)}, flags);
}

ModelPtr flat_torus_model() {
  auto m = warped_torus_model(constant_field(1.0), "flat-torus");
  ModelFlags flags = m->flags();
  flags.fibers_minimal_expected = true;
  return std::make_shared<SubmersionModel>("flat-torus", m->total(), m->base(), m->projection(),
                                           flags);
}

namespace {

std::vector<ScalarField> hopf_projection_fields(int n, bool south) {
  std::vector<ScalarField> proj;
  const int mz = 2 * n + 1;
  // embedding p = (2x, +-(|x|^2 - 1)) / (1+|x|^2); z_j = p_2j + i p_{2j+1};
  // affine coordinates w_j = z_j conj(z_n) / |z_n|^2
  auto pcomp = [mz, south](const JetVec& x, int i) -> Jet {
    Jet s = 1.0 + norm2(x);
    if (i < mz) return 2.0 * x[i] * reciprocal(s);
    Jet h = (norm2(x) - 1.0) * reciprocal(s);
    return south ? -h : h;
  };
  for (int j = 0; j < n; ++j) {
    proj.push_back([j, n, pcomp](const JetVec& x) {  // Re w_j
      Jet a = pcomp(x, 2 * j), b = pcomp(x, 2 * j + 1);
      Jet c = pcomp(x, 2 * n), d = pcomp(x, 2 * n + 1);
      return (a * c + b * d) * reciprocal(c * c + d * d);
    });
    proj.push_back([j, n, pcomp](const JetVec& x) {  // Im w_j
      Jet a = pcomp(x, 2 * j), b = pcomp(x, 2 * j + 1);
      Jet c = pcomp(x, 2 * n), d = pcomp(x, 2 * n + 1);
      return (b * c - a * d) * reciprocal(c * c + d * d);
    });
  }
  return proj;
}

}  // namespace

ModelPtr hopf_model(int n, bool south) {
  if (n < 1) throw std::invalid_argument("hopf_model: n must be >= 1");
  const int mz = 2 * n + 1;
  auto total_mut = std::const_pointer_cast<MetricChart>(
      std::static_pointer_cast<const MetricChart>(sphere_model(mz, 1.0, south)));

  // excluded set: z_n = 0 (the fiber over the removed hyperplane at infinity)
  ExclusionZone zone;
  zone.label = "last-complex-coordinate-zero";
  zone.codim = 2;
  zone.gauge = [mz, south](std::span<const double> x) {
    double n2 = 0;
    for (double v : x) n2 += v * v;
    double s = 1.0 + n2;
    double pr = 2.0 * x[mz - 1] / s;
    double pi = (n2 - 1.0) / s;
    if (south) pi = -pi;
    return std::sqrt(pr * pr + pi * pi);
  };
  total_mut->add_exclusion(std::move(zone));
  ChartPtr total = total_mut;

  ChartPtr base = fubini_study_chart(n);

  ModelFlags flags;
  flags.fibers_minimal_expected = true;
  flags.horizontal_integrable_expected = false;

  std::string name = "hopf-" + std::to_string(n) + (south ? "-south" : "");
  auto model = std::make_shared<SubmersionModel>(name, total, base,
                                                 hopf_projection_fields(n, south), flags);

  // construction-time verification of the Riemannian-submersion property
  auto pts = sample_points(*total, 16, 0x5eed0001u,
                           [&](const Point& z) { return model->admissible(z); });
  for (const auto& z : pts) {
    double r = submersion_isometry_residual(*model, z);
    if (!(r < 1e-9))
      throw std::logic_error("hopf_model: submersion isometry check failed (residual " +
                             std::to_string(r) + ")");
  }
  return model;
}

ModelPtr hopf_bundle_model() {
  // coordinates (s, eta, phi): fiber angle, then base colatitude/azimuth of
  // the radius-1/2 base sphere; chart point corresponds to
  // z1 = cos(eta) e^{i(phi+s)}, z2 = sin(eta) e^{is} on the unit 3-sphere
  Box tb;
  tb.lo = {0.0, 0.0, 0.0};
  tb.hi = {kTwoPi, 1.57079632679489661923, kTwoPi};
  MetricField tmetric = [](const JetVec& z) {
    Jet c = cos(z[1]);
    Jet c2 = c * c;
    Mat<Jet> g(3, 3);
    g(0, 0) = Jet(1.0);
    g(1, 1) = Jet(1.0);
    g(2, 2) = c2;
    g(0, 2) = c2;
    g(2, 0) = c2;
    return g;
  };
  auto total = std::make_shared<MetricChart>(3, tb, tmetric);
  total->set_boundary_margin(5e-2);

  Box bb;
  bb.lo = {0.0, 0.0};
  bb.hi = {1.57079632679489661923, kTwoPi};
  MetricField bmetric = [](const JetVec& y) {
    Jet s2 = sin(2.0 * y[0]);
    Mat<Jet> g(2, 2);
    g(0, 0) = Jet(1.0);
    g(1, 1) = 0.25 * s2 * s2;
    return g;
  };
  auto base = std::make_shared<MetricChart>(2, bb, bmetric);
  base->set_boundary_margin(4e-2);

  ModelFlags flags;
  flags.bundle_form = true;
  flags.full_measure = true;
  flags.fibers_minimal_expected = true;
  flags.horizontal_integrable_expected = false;

  return std::make_shared<SubmersionModel>(
      "hopf-bundle", total, base,
      std::vector<ScalarField>{coordinate_field(1), coordinate_field(2)}, flags);
}

ModelPtr circle_sphere_product_model() {
  ChartPtr base = sphere_model(2, 0.5);
  Box tb;
  tb.lo = {0.0, base->sample_box().lo[0], base->sample_box().lo[1]};
  tb.hi = {kTwoPi, base->sample_box().hi[0], base->sample_box().hi[1]};
  MetricField metric = [base](const JetVec& z) {
    JetVec u(z.begin() + 1, z.end());
    Mat<Jet> gb = base->metric_jets(u);
    Mat<Jet> g(3, 3);
    g(0, 0) = Jet(1.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g(1 + i, 1 + j) = gb(i, j);
    return g;
  };
  auto total = std::make_shared<MetricChart>(3, tb, metric);
  ModelFlags flags;
  flags.bundle_form = true;
  flags.fibers_minimal_expected = true;
  flags.horizontal_integrable_expected = true;
  return std::make_shared<SubmersionModel>(
      "circle-sphere-product", total, base,
      std::vector<ScalarField>{coordinate_field(1), coordinate_field(2)}, flags);
}

ModelPtr circle_polar_sphere_model() {
  ChartPtr base = polar_sphere_chart(1.0);
  Box tb;
  tb.lo = {0.0, base->sample_box().lo[0], base->sample_box().lo[1]};
  tb.hi = {kTwoPi, base->sample_box().hi[0], base->sample_box().hi[1]};
  MetricField metric = [base](const JetVec& z) {
    JetVec u(z.begin() + 1, z.end());
    Mat<Jet> gb = base->metric_jets(u);
    Mat<Jet> g(3, 3);
    g(0, 0) = Jet(1.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g(1 + i, 1 + j) = gb(i, j);
    return g;
  };
  auto total = std::make_shared<MetricChart>(3, tb, metric);
  total->set_boundary_margin(5e-2);
  ModelFlags flags;
  flags.bundle_form = true;
  flags.full_measure = true;
  flags.fibers_minimal_expected = true;
  flags.horizontal_integrable_expected = true;
  return std::make_shared<SubmersionModel>(
      "circle-polar-sphere", total, base,
      std::vector<ScalarField>{coordinate_field(1), coordinate_field(2)}, flags);
}

// -- named forms ----------------------------------------------------------------

FormField named_base_form(const ModelPtr& model, const std::string& key) {
  const std::string& name = model->name();
  ChartPtr base = model->base();

  if (key == "volume") return volume_form(base);

  if (key == "nu2") {
    if (base->dim() != 2)
      throw std::invalid_argument("named form nu2 needs a 2-dimensional base");
    return volume_form(base);
  }

  if (key == "mu2") {
    if (name.rfind("hopf-", 0) != 0 || base->dim() % 2 != 0)
      throw std::invalid_argument("named form mu2 needs a Fubini-Study base");
    return fs_kaehler_form(base, base->dim() / 2);
  }

  if (key == "mu2-wedge-2") {
    if (base->dim() != 4)
      throw std::invalid_argument("named form mu2-wedge-2 needs CP^2");
    FormField mu2 = fs_kaehler_form(base, 2);
    std::map<Mask, ScalarField> coeffs;
    Mask top = (Mask{1} << 4) - 1;
    coeffs.emplace(top, [mu2](const JetVec& w) {
      FormJets k = mu2.eval_jets(w);
      BasicForm<Jet> f(2, 4);
      for (const auto& [mask, c] : k) f.set(mask, c);
      auto sq = wedge(f, f);
      return sq.coeff((Mask{1} << 4) - 1);
    });
    return FormField(base, 4, std::move(coeffs));
  }

  if (key == "y1") {
    std::map<Mask, ScalarField> coeffs;
    if (name == "circle-polar-sphere") {
      coeffs.emplace(0, [](const JetVec& y) { return cos(y[0]); });
    } else if (name.rfind("hopf-", 0) == 0 && base->dim() == 2) {
      // height function in the affine chart of CP^1 = S^2(1/2)
      coeffs.emplace(0, [](const JetVec& w) {
        Jet n2 = w[0] * w[0] + w[1] * w[1];
        return (1.0 - n2) * reciprocal(1.0 + n2);
      });
    } else if (!base->embedding().empty()) {
      auto embed = base->embedding();
      coeffs.emplace(0, [embed](const JetVec& x) { return embed.back()(x); });
    } else {
      throw std::invalid_argument("named form y1 unsupported for model " + name);
    }
    return FormField(base, 0, std::move(coeffs));
  }

  if (key == "sin-y") {
    if (base->dim() != 1) throw std::invalid_argument("named form sin-y needs a circle base");
    std::map<Mask, ScalarField> coeffs;
    coeffs.emplace(0, [](const JetVec& y) { return sin(y[0]); });
    return FormField(base, 0, std::move(coeffs));
  }

  if (key == "nu2-sin-tau") {
    // on a product base (2-sphere chart) x (circle appended last):
    // sin(tau) times the sphere area form
    const int mb = base->dim();
    if (mb != 3) throw std::invalid_argument("named form nu2-sin-tau needs base dim 3");
    std::map<Mask, ScalarField> coeffs;
    coeffs.emplace(tuple_to_mask({1, 2}, mb), [base](const JetVec& y) {
      // area form coefficient of the first-factor sphere metric
      Mat<Jet> g = base->metric_jets(y);
      Mat<Jet> g2(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g2(i, j) = g(i, j);
      return sqrt(determinant(g2)) * sin(y[2]);
    });
    return FormField(base, 2, std::move(coeffs));
  }

  throw std::invalid_argument("unknown named form: " + key);
}

// -- catalog + registry ----------------------------------------------------------

const std::vector<CatalogEntry>& eigenform_catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"hopf1-nu2", "hopf-1", "nu2", 2, 0.0, 4.0, "literature"},
      {"hopf-bundle-nu2", "hopf-bundle", "nu2", 2, 0.0, 4.0, "literature"},
      {"hopf2-mu2", "hopf-2", "mu2", 2, 0.0, 8.0, "literature"},
      {"hopf2-mu2-wedge-2", "hopf-2", "mu2-wedge-2", 4, 0.0, 8.0, "literature"},
      {"hopf1-y1", "hopf-1", "y1", 0, 8.0, 8.0, "derived"},
      {"s3s3-nu2", "fiber-product-s3s3", "nu2", 2, 0.0, 8.0, "derived"},
      {"flat-torus-sin-y", "flat-torus", "sin-y", 0, 1.0, 1.0, "derived"},
      {"hopf1-circle-nu2-sin", "hopf-1-x-circle", "nu2-sin-tau", 2, 1.0, 5.0, "derived"},
      {"circle-polar-sphere-y1", "circle-polar-sphere", "y1", 0, 2.0, 2.0, "derived"},
  };
  return entries;
}

ModelPtr get_model(const std::string& name) {
  static std::recursive_mutex mu;
  static std::map<std::string, ModelPtr> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;

  ModelPtr m;
  if (name == "flat-torus") {
    m = flat_torus_model();
  } else if (name == "warped-torus") {
    m = warped_torus_model([](const JetVec& y) { return 2.0 + sin(y[0]); }, "warped-torus");
  } else if (name == "warped-torus-b") {
    m = warped_torus_model([](const JetVec& y) { return 1.5 + 0.5 * cos(y[0]); },
                           "warped-torus-b");
  } else if (name == "hopf-1") {
    m = hopf_model(1);
  } else if (name == "hopf-1-south") {
    m = hopf_model(1, true);
  } else if (name == "hopf-2") {
    m = hopf_model(2);
  } else if (name == "hopf-bundle") {
    m = hopf_bundle_model();
  } else if (name == "fiber-product-s3s3") {
    m = fiber_product(get_model("hopf-bundle"), get_model("hopf-bundle"), "fiber-product-s3s3");
  } else if (name == "fiber-product-warped") {
    m = fiber_product(get_model("warped-torus"), get_model("warped-torus-b"),
                      "fiber-product-warped");
  } else if (name == "circle-sphere-product") {
    m = circle_sphere_product_model();
  } else if (name == "circle-polar-sphere") {
    m = circle_polar_sphere_model();
  } else if (name == "hopf-1-x-circle") {
    m = product_with_circle(get_model("hopf-1"), "hopf-1-x-circle");
  } else {
    throw std::invalid_argument("unknown model: " + name);
  }
  cache.emplace(name, m);
  return m;
}

std::vector<std::string> model_names() {
  return {"flat-torus",          "warped-torus",       "warped-torus-b",
          "hopf-1",              "hopf-1-south",       "hopf-2",
          "hopf-bundle",         "fiber-product-s3s3", "fiber-product-warped",
          "circle-sphere-product", "circle-polar-sphere", "hopf-1-x-circle"};
}

}  // namespace vsub
