#include <doctest.h>

#include <cmath>

#include "vsub/models.hpp"
#include "vsub/orbifold.hpp"
#include "vsub/sampling.hpp"

using namespace vsub;

TEST_CASE("bezout") {
  auto check = [](long p, long q, long ea, long eb) {
    auto [a, b] = bezout(p, q);
    CHECK(a == ea);
    CHECK(b == eb);
    CHECK(a * p - b * q == 1);
  };
  check(1, 1, 1, 0);
  check(2, 3, 2, 1);
  check(3, 5, 2, 1);
  check(3, 1, 1, 2);
  check(5, 7, 3, 2);
  CHECK_THROWS_AS(bezout(2, 4), std::invalid_argument);
  CHECK_THROWS_AS(bezout(0, 1), std::invalid_argument);
}

TEST_CASE("cyclic actions") {
  SUBCASE("n = 1 gives the trivial group") {
    auto a = cyclic_action(1, {1}, ambient_chart(3));
    CHECK(a.order() == 1);
    CHECK(group_axioms_residual(a) < 1e-15);
  }

  SUBCASE("generator of rho3 rotates the first complex factor by 2 pi / 3") {
    auto a = cyclic_action(3, {1, 0}, ambient_chart(4));
    REQUIRE(a.order() == 3);
    const Matd& g = a.elements[1];
    double c = std::cos(2.0 * M_PI / 3.0), s = std::sin(2.0 * M_PI / 3.0);
    CHECK(g(0, 0) == doctest::Approx(c).epsilon(1e-15));
    CHECK(g(1, 0) == doctest::Approx(s).epsilon(1e-15));
    CHECK(g(2, 2) == 1.0);
    CHECK(g(3, 3) == 1.0);
    CHECK(g(2, 3) == 0.0);
  }

  SUBCASE("weights (ap, bq) for (p,q) = (2,3): generator has order 6") {
    auto [a, b] = bezout(2, 3);
    CHECK(a * 2 - b * 3 == 1);
    auto act = cyclic_action(6, {static_cast<int>(a) * 2, static_cast<int>(b) * 3},
                             ambient_chart(4));
    auto fpd = fixed_point_data(act.elements[1]);
    CHECK(fpd.element_order == 6);
  }

  SUBCASE("group axioms and isometry for the catalog actions") {
    std::vector<GroupAction> actions;
    actions.push_back(cyclic_action(5, {1}, ambient_chart(3)));
    actions.push_back(cyclic_action(5, {1, 0}, ambient_chart(4)));
    actions.push_back(cyclic_action(6, {4, 3}, ambient_chart(4)));
    for (const auto& act : actions) {
      CHECK(group_axioms_residual(act) < 1e-12);
      CHECK(isometry_residual(act, 10, 99) < 1e-10);
    }
  }

  SUBCASE("weight count must fit the chart") {
    CHECK_THROWS_AS(cyclic_action(3, {1, 1}, ambient_chart(3)), std::invalid_argument);
  }
}

TEST_CASE("fixed point data") {
  SUBCASE("identity fixes everything") {
    auto a = cyclic_action(4, {1}, ambient_chart(3));
    auto fpd = fixed_point_data(a.elements[0]);
    CHECK(fpd.fixed_dim == 3);
    CHECK(fpd.codim == 0);
    CHECK(fpd.element_order == 1);
  }

  SUBCASE("rho3 non-identity elements fix the plane z1 = 0") {
    auto a = cyclic_action(5, {1, 0}, ambient_chart(4));
    for (int k = 1; k < 5; ++k) {
      auto fpd = fixed_point_data(a.elements[k]);
      CHECK(fpd.fixed_dim == 2);
      CHECK(fpd.codim == 2);
    }
  }

  SUBCASE("rho2 non-identity elements fix the vertical axis") {
    auto a = cyclic_action(4, {1}, ambient_chart(3));
    for (int k = 1; k < 4; ++k) CHECK(fixed_point_data(a.elements[k]).codim == 2);
  }

  SUBCASE("rho3-pq elements: codimension 2 or 4, never 1") {
    auto a = cyclic_action(6, {4, 3}, ambient_chart(4));
    for (int k = 1; k < 6; ++k) {
      auto fpd = fixed_point_data(a.elements[k]);
      CHECK(fpd.codim >= 2);
      CHECK((fpd.codim == 2 || fpd.codim == 4));
    }
  }
}

TEST_CASE("isotropy orders along the exceptional fiber circles") {
  // (p, q) = (2, 3): action (gamma^{ap} z1, gamma^{bq} z2) with ap = 4, bq = 3.
  auto act = cyclic_action(6, {4, 3}, ambient_chart(4));

  // points on the circle (z1, 0): isotropy subgroup Z_p
  Point north = {1.0, 0.0, 0.0, 0.0};
  Point north2 = {std::cos(0.9), std::sin(0.9), 0.0, 0.0};
  CHECK(isotropy_order(act, north) == 2);
  CHECK(isotropy_order(act, north2) == 2);

  // points on the circle (0, z2): isotropy subgroup Z_q
  Point south = {0.0, 0.0, 1.0, 0.0};
  Point south2 = {0.0, 0.0, std::cos(0.3), std::sin(0.3)};
  CHECK(isotropy_order(act, south) == 3);
  CHECK(isotropy_order(act, south2) == 3);

  // generic points are free
  Point generic = {0.5, 0.1, 0.7, 0.2};
  CHECK(isotropy_order(act, generic) == 1);
}

TEST_CASE("invariance residuals") {
  SUBCASE("trivial group gives zero residual") {
    auto act = cyclic_action(1, {1}, ambient_chart(3));
    auto phi = ambient_nu2(act.chart);
    auto pts = sample_orbit_points(act, 20, 555);
    auto r = invariance_residual(act, phi, pts);
    CHECK(r.max_residual < 1e-15);
  }

  SUBCASE("the half-radius sphere area form is rotation invariant") {
    for (int n : {2, 3, 6}) {
      auto act = cyclic_action(n, {1}, ambient_chart(3));
      auto phi = ambient_nu2(act.chart);
      auto pts = sample_orbit_points(act, 50, 556);
      auto r = invariance_residual(act, phi, pts);
      CHECK(r.max_residual < 1e-10);
    }
  }

  SUBCASE("Re(z1) is detected as non-invariant under rho3(Z_3)") {
    auto act = cyclic_action(3, {1, 0}, ambient_chart(4));
    std::map<Mask, ScalarField> c;
    c.emplace(Mask{0}, [](const JetVec& x) { return x[0]; });
    FormField phi(act.chart, 0, std::move(c));
    auto pts = sample_orbit_points(act, 100, 557);
    auto r = invariance_residual(act, phi, pts);
    CHECK(r.max_residual > 0.5);
  }
}

TEST_CASE("equivariance of the cyclic actions with the Hopf map") {
  SUBCASE("rho3 / rho2 with n = 5") {
    auto up = cyclic_action(5, {1, 0}, ambient_chart(4));
    auto down = cyclic_action(5, {1}, ambient_chart(3));
    auto pts = sample_orbit_points(up, 100, 600);
    auto r = equivariance_residual(up, down, hopf_ambient_map(), pts);
    CHECK(r.max_residual < 1e-12);
  }

  SUBCASE("rho3-pq / rho2 with (p,q) = (2,3) uses ap - bq = 1") {
    auto up = cyclic_action(6, {4, 3}, ambient_chart(4));
    auto down = cyclic_action(6, {1}, ambient_chart(3));
    auto pts = sample_orbit_points(up, 100, 601);
    auto r = equivariance_residual(up, down, hopf_ambient_map(), pts);
    CHECK(r.max_residual < 1e-12);
  }

  SUBCASE("group order mismatch is rejected") {
    auto up = cyclic_action(4, {1, 0}, ambient_chart(4));
    auto down = cyclic_action(5, {1}, ambient_chart(3));
    CHECK_THROWS_AS(equivariance_residual(up, down, hopf_ambient_map(), {}),
                    std::invalid_argument);
  }

  SUBCASE("the ambient Hopf map lands on the unit sphere") {
    auto map = hopf_ambient_map();
    CounterRng rng(77);
    for (int t = 0; t < 20; ++t) {
      // random point on the unit 3-sphere
      Point z(4);
      double n2 = 0;
      for (auto& v : z) {
        v = rng.normal();
      }
      for (double v : z) n2 += v * v;
      for (auto& v : z) v /= std::sqrt(n2);
      JetVec seeds = seed_point(z, 1);
      double r2 = 0;
      for (const auto& f : map) {
        double v = f(seeds).value();
        r2 += v * v;
      }
      CHECK(std::sqrt(r2) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("quotient eigenform transport record") {
  // invariant eigenform upstairs descends with the same eigenvalue: the
  // operational record combines (a) the pointwise eigen-residual on the
  // covering chart and (b) the invariance residual under the deck action
  auto model = get_model("hopf-1");
  FormField nu2 = named_base_form(model, "nu2");
  auto pts = sample_points(*model->base(), 25, 700);
  double eig = 0;
  for (const auto& y : pts) eig = std::max(eig, eigen_residual(nu2, 0.0, y));
  CHECK(eig < 1e-9);

  auto act = cyclic_action(4, {1}, ambient_chart(3));
  auto phi = ambient_nu2(act.chart);
  auto opts = sample_orbit_points(act, 25, 701);
  auto inv = invariance_residual(act, phi, opts);
  CHECK(inv.max_residual < 1e-10);
  // both residuals below tolerance: the quotient record carries lambda = 0
}
