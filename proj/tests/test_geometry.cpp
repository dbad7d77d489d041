#include <doctest.h>

#include <cmath>

#include "vsub/calculus.hpp"
#include "vsub/models.hpp"
#include "vsub/rng.hpp"
#include "vsub/sampling.hpp"

using namespace vsub;

namespace {

FormField random_poly_form(ChartPtr chart, int degree, int maxdeg, CounterRng& rng) {
  const int m = chart->dim();
  std::map<Mask, ScalarField> coeffs;
  for (Mask mask : increasing_masks(m, degree)) {
    std::vector<PolyTerm> terms;
    // a handful of random monomials of total degree <= maxdeg
    for (int t = 0; t < 4; ++t) {
      PolyTerm pt;
      pt.exps.assign(m, 0);
      int budget = maxdeg;
      for (int v = 0; v < m; ++v) {
        int e = static_cast<int>(rng.next_double() * (budget + 1));
        pt.exps[v] = e;
        budget -= e;
      }
      pt.coeff = rng.uniform(-1.0, 1.0);
      terms.push_back(std::move(pt));
    }
    coeffs.emplace(mask, polynomial_field(std::move(terms)));
  }
  return FormField(chart, degree, std::move(coeffs));
}

}  // namespace

TEST_CASE("orthonormal coframe examples") {
  SUBCASE("euclidean metric keeps the coordinate coframe") {
    auto chart = euclidean_chart(3);
    auto cf = orthonormal_coframe(*chart, std::vector<double>{0.3, -0.2, 0.9});
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(cf.co(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
  }

  SUBCASE("diagonal metric scales the coframe") {
    MetricField metric = [](const JetVec&) {
      Mat<Jet> g(2, 2);
      g(0, 0) = Jet(4.0);
      g(1, 1) = Jet(9.0);
      return g;
    };
    Box b;
    b.lo = {-1, -1};
    b.hi = {1, 1};
    auto chart = std::make_shared<MetricChart>(2, b, metric);
    auto cf = orthonormal_coframe(*chart, std::vector<double>{0.0, 0.0});
    CHECK(cf.co(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(cf.co(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(cf.co(0, 1) == doctest::Approx(0.0));
  }

  SUBCASE("round sphere chart metric at origin is 4I, coframe {2du,2dv}") {
    // oracle: pull the embedding metric back through the chart map
    auto chart = sphere_model(2, 1.0);
    Point origin = {0.0, 0.0};
    JetVec seeds = seed_point(origin, 1);
    auto embed = chart->embedding();
    Mat<Jet> J(3, 2);
    for (int i = 0; i < 3; ++i) {
      Jet pi = embed[i](seeds);
      for (int k = 0; k < 2; ++k) J(i, k) = pi.partial(k);
    }
    Matd pulled(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double s = 0;
        for (int i = 0; i < 3; ++i) s += J(i, a).value() * J(i, b).value();
        pulled(a, b) = s;
      }
    Matd g = chart->metric_at(origin);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(g(a, b) == doctest::Approx(pulled(a, b)).epsilon(1e-12));
    CHECK(g(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

    auto cf = orthonormal_coframe(*chart, origin);
    CHECK(cf.co(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(cf.co(1, 1) == doctest::Approx(2.0).epsilon(1e-13));
  }

  SUBCASE("embedding pullback matches chart metric away from origin too") {
    auto chart = sphere_model(2, 1.0);
    CounterRng rng(4242);
    for (int t = 0; t < 10; ++t) {
      Point u = {rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
      JetVec seeds = seed_point(u, 1);
      auto embed = chart->embedding();
      Matd pulled(2, 2);
      std::vector<Jet> p;
      for (int i = 0; i < 3; ++i) p.push_back(embed[i](seeds));
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double s = 0;
          for (int i = 0; i < 3; ++i) s += p[i].partial(a).value() * p[i].partial(b).value();
          pulled(a, b) = s;
        }
      Matd g = chart->metric_at(u);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          CHECK(std::abs(g(a, b) - pulled(a, b)) < 1e-12 * (1.0 + std::abs(g(a, b))));
    }
  }
}

TEST_CASE("lie brackets") {
  auto chart = euclidean_chart(2);

  SUBCASE("coordinate fields commute") {
    VectorField X(chart, {constant_field(1.0), constant_field(0.0)});
    VectorField Y(chart, {constant_field(0.0), constant_field(1.0)});
    auto br = lie_bracket(X, Y, std::vector<double>{0.4, 0.1});
    CHECK(br[0] == 0.0);
    CHECK(br[1] == 0.0);
  }

  SUBCASE("product rule against hand computation") {
    // X = (x1)^2 d1, Y = d1: [X,Y] = -2 x1 d1
    VectorField X(chart, {[](const JetVec& x) { return x[0] * x[0]; }, constant_field(0.0)});
    VectorField Y(chart, {constant_field(1.0), constant_field(0.0)});
    auto br = lie_bracket(X, Y, std::vector<double>{1.0, 0.0});
    CHECK(br[0] == doctest::Approx(-2.0).epsilon(1e-14));
  }

  SUBCASE("rotation field bracket against a finite-difference oracle") {
    // X = x1 d2 - x2 d1 (rotation), Y = d1
    VectorField X(chart, {[](const JetVec& x) { return -x[1]; },
                          [](const JetVec& x) { return x[0]; }});
    VectorField Y(chart, {constant_field(1.0), constant_field(0.0)});
    Point at = {0.7, -0.3};
    auto br = lie_bracket(X, Y, at);

    // oracle: central differences of the flows' components, step 1e-5
    auto Xc = [](const Point& p) { return std::vector<double>{-p[1], p[0]}; };
    auto Yc = [](const Point&) { return std::vector<double>{1.0, 0.0}; };
    double h = 1e-5;
    std::vector<double> fd(2, 0.0);
    for (int k = 0; k < 2; ++k) {
      double s = 0;
      for (int j = 0; j < 2; ++j) {
        Point pp = at, pm = at;
        pp[j] += h;
        pm[j] -= h;
        s += Xc(at)[j] * (Yc(pp)[k] - Yc(pm)[k]) / (2 * h);
        s -= Yc(at)[j] * (Xc(pp)[k] - Xc(pm)[k]) / (2 * h);
      }
      fd[k] = s;
    }
    CHECK(std::abs(br[0] - fd[0]) < 1e-6);
    CHECK(std::abs(br[1] - fd[1]) < 1e-6);
    CHECK(br[1] == doctest::Approx(-1.0).epsilon(1e-12));  // [X, d1] = -d2
  }
}

TEST_CASE("exterior derivative examples") {
  auto chart = euclidean_chart(2);

  SUBCASE("constants close") {
    FormField f(chart, 0, {{Mask{0}, constant_field(3.0)}});
    CHECK(exterior_derivative(f, std::vector<double>{0.2, 0.4}).coeffs().empty());
  }

  SUBCASE("d(x1 dx2) = dx1^dx2") {
    std::map<Mask, ScalarField> c;
    c.emplace(tuple_to_mask({2}, 2), [](const JetVec& x) { return x[0]; });
    FormField w(chart, 1, std::move(c));
    auto d = exterior_derivative(w, std::vector<double>{0.5, -0.1});
    CHECK(d.coeff({1, 2}) == doctest::Approx(1.0));
  }

  SUBCASE("top-degree input returns the zero form") {
    std::map<Mask, ScalarField> c;
    c.emplace(tuple_to_mask({1, 2}, 2), [](const JetVec& x) { return x[0] * x[1]; });
    FormField w(chart, 2, std::move(c));
    auto d = exterior_derivative(w, std::vector<double>{0.5, -0.1});
    CHECK(d.coeffs().empty());
  }
}

TEST_CASE("codifferential examples") {
  auto chart = euclidean_chart(2);

  SUBCASE("delta(df) of |x|^2 is -4 on flat R^2") {
    std::map<Mask, ScalarField> c;
    c.emplace(tuple_to_mask({1}, 2), [](const JetVec& x) { return 2.0 * x[0]; });
    c.emplace(tuple_to_mask({2}, 2), [](const JetVec& x) { return 2.0 * x[1]; });
    FormField df(chart, 1, std::move(c));
    auto r = codifferential(df, std::vector<double>{0.3, 0.8});
    CHECK(r.coeff(std::vector<int>{}) == doctest::Approx(-4.0).epsilon(1e-13));
  }

  SUBCASE("divergence-free field has zero codifferential") {
    std::map<Mask, ScalarField> c;
    c.emplace(tuple_to_mask({1}, 2), [](const JetVec& x) { return x[1]; });  // x2 dx1
    FormField w(chart, 1, std::move(c));
    auto r = codifferential(w, std::vector<double>{0.3, 0.8});
    CHECK(norm(r) < 1e-14);
  }

  SUBCASE("volume form of the flat torus is coclosed") {
    auto model = get_model("flat-torus");
    auto vol = volume_form(model->total());
    auto r = codifferential(vol, std::vector<double>{1.1, 2.2});
    CHECK(norm(r) < 1e-13);
  }
}

TEST_CASE("laplacian examples and sphere spectrum") {
  SUBCASE("laplacian of a constant vanishes") {
    auto chart = euclidean_chart(2);
    FormField f(chart, 0, {{Mask{0}, constant_field(2.5)}});
    CHECK(norm(laplacian(f, std::vector<double>{0.1, 0.2})) < 1e-14);
  }

  SUBCASE("degree-1 harmonic on the unit 2-sphere has eigenvalue 2") {
    auto chart = sphere_model(2, 1.0);
    std::map<Mask, ScalarField> c;
    c.emplace(Mask{0}, embedded_polynomial(chart, {{{1, 0, 0}, 1.0}}));
    FormField y1(chart, 0, std::move(c));
    CounterRng rng(7);
    for (int t = 0; t < 20; ++t) {
      Point u = {rng.uniform(-1.3, 1.3), rng.uniform(-1.3, 1.3)};
      CHECK(eigen_residual(y1, 2.0, u) < 1e-8);
    }
  }

  SUBCASE("volume form of the radius-1/2 sphere is harmonic") {
    auto chart = sphere_model(2, 0.5);
    auto nu2 = volume_form(chart);
    CounterRng rng(8);
    for (int t = 0; t < 10; ++t) {
      Point u = {rng.uniform(-1.3, 1.3), rng.uniform(-1.3, 1.3)};
      auto L = laplacian(nu2, u);
      CHECK(metric_norm(*chart, u, L) < 1e-9);
      // closed and coclosed individually
      CHECK(norm(exterior_derivative(nu2, u)) < 1e-12);
      CHECK(metric_norm(*chart, u, codifferential(nu2, u)) < 1e-10);
    }
  }

  SUBCASE("harmonic polynomial restrictions: eigenvalue k(k+m-1) on S^m") {
    struct Case {
      int m;  // sphere dimension
      int k;
      std::vector<PolyTerm> poly;  // harmonic in R^{m+1}
    };
    std::vector<Case> cases;
    // k=1: coordinate functions
    cases.push_back({2, 1, {{{0, 1, 0}, 1.0}}});
    cases.push_back({3, 1, {{{0, 0, 1, 0}, 1.0}}});
    cases.push_back({4, 1, {{{0, 0, 0, 0, 1}, 1.0}}});
    // k=2: x1 x2 and x1^2 - x2^2
    cases.push_back({2, 2, {{{1, 1, 0}, 1.0}}});
    cases.push_back({2, 2, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, -1.0}}});
    cases.push_back({3, 2, {{{1, 0, 1, 0}, 1.0}}});
    cases.push_back({4, 2, {{{0, 1, 0, 1, 0}, 1.0}}});
    // k=3: x1 x2 x3 and x1^3 - 3 x1 x2^2
    cases.push_back({2, 3, {{{1, 1, 1}, 1.0}}});
    cases.push_back({3, 3, {{{3, 0, 0, 0}, 1.0}, {{1, 2, 0, 0}, -3.0}}});
    cases.push_back({4, 3, {{{1, 1, 0, 1, 0}, 1.0}}});

    for (const auto& cse : cases) {
      auto chart = sphere_model(cse.m, 1.0);
      std::map<Mask, ScalarField> c;
      c.emplace(Mask{0}, embedded_polynomial(chart, cse.poly));
      FormField f(chart, 0, std::move(c));
      double lambda = cse.k * (cse.k + cse.m - 1);
      CounterRng rng(1000 + cse.m * 10 + cse.k);
      for (int t = 0; t < 8; ++t) {
        Point u(cse.m);
        for (auto& v : u) v = rng.uniform(-1.2, 1.2);
        CHECK(eigen_residual(f, lambda, u) < 1e-7);
      }
    }
  }
}

TEST_CASE("gauss curvature spot check") {
  auto chart = sphere_model(2, 1.0);
  CHECK(gauss_curvature(*chart, std::vector<double>{0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gauss_curvature(*chart, std::vector<double>{0.6, -0.4}) == doctest::Approx(1.0).epsilon(1e-9));
  auto half = sphere_model(2, 0.5);  // radius 1/2: curvature 4
  CHECK(gauss_curvature(*half, std::vector<double>{0.3, 0.2}) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("d^2 = 0 and delta^2 = 0 on random polynomial fields") {
  CounterRng rng(13);
  std::vector<ChartPtr> charts = {euclidean_chart(3), sphere_model(2, 1.0),
                                  get_model("warped-torus")->total()};
  for (auto& chart : charts) {
    const int m = chart->dim();
    for (int p = 0; p <= m - 2; ++p) {
      FormField w = random_poly_form(chart, p, 2, rng);
      auto pts = sample_points(*chart, 5, 97531 + p);
      for (const auto& x : pts) {
        JetVec seeds = seed_point(x, 3);
        FormJets F = w.eval_jets(seeds);
        FormJets dF = d_jets(F, p, m);
        MultiIndexForm dd = form_values(d_jets(dF, p + 1, m), p + 2, m);
        CHECK(norm(dd) < 1e-10);
      }
    }
    for (int p = 2; p <= m; ++p) {
      FormField w = random_poly_form(chart, p, 2, rng);
      auto pts = sample_points(*chart, 5, 8642 + p);
      for (const auto& x : pts) {
        JetVec seeds = seed_point(x, 3);
        MetricJets M = metric_jets(*chart, seeds);
        FormJets F = w.eval_jets(seeds);
        FormJets sF = delta_jets(F, p, m, M);
        MultiIndexForm ss = form_values(delta_jets(sF, p - 1, m, M), p - 2, m);
        CHECK(metric_norm(*chart, x, ss) < 1e-10 * (1.0 + metric_norm(*chart, x, form_values(sF, p - 1, m))));
      }
    }
  }
}

TEST_CASE("laplacian commutes with d and delta pointwise") {
  CounterRng rng(21);
  auto chart = sphere_model(2, 1.0);
  const int m = 2;
  for (int p = 0; p <= 1; ++p) {
    FormField w = random_poly_form(chart, p, 2, rng);
    auto pts = sample_points(*chart, 4, 1111 + p);
    for (const auto& x : pts) {
      JetVec seeds = seed_point(x, 4);
      MetricJets M = metric_jets(*chart, seeds);
      FormJets F = w.eval_jets(seeds);
      // d Delta w vs Delta d w
      FormJets LF = laplacian_jets(F, p, m, M);
      MultiIndexForm dL = form_values(d_jets(LF, p, m), p + 1, m);
      FormJets dF = d_jets(F, p, m);
      MultiIndexForm Ld = form_values(laplacian_jets(dF, p + 1, m, M), p + 1, m);
      double scale = 1.0 + metric_norm(*chart, x, Ld);
      CHECK(metric_norm(*chart, x, dL - Ld) < 1e-7 * scale);

      // delta Delta w vs Delta delta w
      if (p >= 1) {
        MultiIndexForm sL = form_values(delta_jets(LF, p, m, M), p - 1, m);
        FormJets sF = delta_jets(F, p, m, M);
        MultiIndexForm Ls = form_values(laplacian_jets(sF, p - 1, m, M), p - 1, m);
        double sscale = 1.0 + metric_norm(*chart, x, Ls);
        CHECK(metric_norm(*chart, x, sL - Ls) < 1e-7 * sscale);
      }
    }
  }
}

TEST_CASE("jet laplacian matches a finite-difference divergence oracle on functions") {
  // independent route: Delta f = -(1/sqrt g) d_i ( sqrt g g^{ij} d_j f )
  // with every derivative taken by Richardson central differences and the
  // metric evaluated pointwise (no jets anywhere)
  auto fd_laplacian = [](const ChartPtr& chart, const std::function<double(const Point&)>& f,
                         const Point& x) {
    const int m = chart->dim();
    auto flux = [&](const Point& p, int i) {
      Matd g = chart->metric_at(p);
      Matd ginv = inverse(g);
      double sg = std::sqrt(determinant(g));
      double s = 0;
      for (int j = 0; j < m; ++j) {
        auto pp = p, pm = p;
        double h = 1e-4;
        pp[j] += h;
        pm[j] -= h;
        double d1 = (f(pp) - f(pm)) / (2 * h);
        pp[j] = p[j] + h / 2;
        pm[j] = p[j] - h / 2;
        double d2 = (f(pp) - f(pm)) / h;
        s += ginv(i, j) * (4 * d2 - d1) / 3.0;
      }
      return sg * s;
    };
    double div = 0;
    for (int i = 0; i < m; ++i) {
      auto pp = x, pm = x;
      double h = 1e-3;
      pp[i] += h;
      pm[i] -= h;
      double d1 = (flux(pp, i) - flux(pm, i)) / (2 * h);
      pp[i] = x[i] + h / 2;
      pm[i] = x[i] - h / 2;
      double d2 = (flux(pp, i) - flux(pm, i)) / h;
      div += (4 * d2 - d1) / 3.0;
    }
    Matd g = chart->metric_at(x);
    return -div / std::sqrt(determinant(g));
  };

  struct Case {
    ChartPtr chart;
    ScalarField jf;
    std::function<double(const Point&)> f;
  };
  std::vector<Case> cases;
  cases.push_back({get_model("warped-torus")->total(),
                   [](const JetVec& v) { return sin(v[0]) * cos(v[1]) + 0.3 * v[1]; },
                   [](const Point& p) { return std::sin(p[0]) * std::cos(p[1]) + 0.3 * p[1]; }});
  cases.push_back({sphere_model(2, 1.0),
                   [](const JetVec& v) { return v[0] * v[0] - 0.5 * v[1]; },
                   [](const Point& p) { return p[0] * p[0] - 0.5 * p[1]; }});

  for (auto& cse : cases) {
    std::map<Mask, ScalarField> c;
    c.emplace(Mask{0}, cse.jf);
    FormField field(cse.chart, 0, std::move(c));
    auto pts = sample_points(*cse.chart, 6, 2411);
    for (const auto& x : pts) {
      double jet_val = laplacian(field, x).coeff(std::vector<int>{});
      double fd_val = fd_laplacian(cse.chart, cse.f, x);
      CHECK(std::abs(jet_val - fd_val) < 2e-5 * (1.0 + std::abs(jet_val)));
    }
  }
}

TEST_CASE("metric positive-definiteness is enforced") {
  MetricField bad = [](const JetVec&) {
    Mat<Jet> g(2, 2);
    g(0, 0) = Jet(1.0);
    g(1, 1) = Jet(-1.0);
    return g;
  };
  Box b;
  b.lo = {-1, -1};
  b.hi = {1, 1};
  auto chart = std::make_shared<MetricChart>(2, b, bad);
  CHECK_THROWS(orthonormal_coframe(*chart, std::vector<double>{0.0, 0.0}));
}
