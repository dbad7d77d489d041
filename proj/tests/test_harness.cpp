#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vsub/models.hpp"
#include "vsub/rayleigh.hpp"
#include "vsub/rng.hpp"
#include "vsub/sampling.hpp"
#include "vsub/scenario.hpp"

using namespace vsub;

TEST_CASE("counter rng is pinned") {
  // frozen outputs of the documented SplitMix64 counter construction
  CounterRng rng(42);
  CHECK(rng.next_u64() == 0xbdd732262feb6e95ull);
  CHECK(rng.next_u64() == 0x28efe333b266f103ull);
  CounterRng again(42);
  CHECK(again.next_double() == 0.74156487877182331);
}

TEST_CASE("sampling") {
  SUBCASE("deterministic for a fixed seed") {
    auto chart = euclidean_chart(3);
    auto a = sample_points(*chart, 10, 1234);
    auto b = sample_points(*chart, 10, 1234);
    CHECK(a == b);
    auto c = sample_points(*chart, 10, 1235);
    CHECK(a != c);
  }

  SUBCASE("points avoid excluded sets by the sampling margin") {
    auto chart = std::const_pointer_cast<MetricChart>(
        std::static_pointer_cast<const MetricChart>(euclidean_chart(2, 1.0)));
    chart->add_exclusion(ExclusionZone::affine("axis-plane", {0.0, 0.0},
                                               {{1.0, 0.0}, {0.0, 1.0}}));
    auto pts = sample_points(*chart, 200, 71);
    for (const auto& x : pts) {
      CHECK(std::sqrt(x[0] * x[0] + x[1] * x[1]) > 1e-2);
      CHECK(std::abs(x[0]) < 1.0 - chart->boundary_margin() + 1e-12);
    }
  }

  SUBCASE("rejection cap reports degenerate charts") {
    auto chart = std::const_pointer_cast<MetricChart>(
        std::static_pointer_cast<const MetricChart>(euclidean_chart(1, 1.0)));
    chart->add_exclusion(
        ExclusionZone{"everything", 1, [](std::span<const double>) { return 0.0; }});
    CHECK_THROWS_AS(sample_points(*chart, 3, 1), std::runtime_error);
  }
}

TEST_CASE("scenario parsing and validation") {
  nlohmann::json ok = {{"model", "flat-torus"}, {"check", "theta-omega"}, {"tolerance", 1e-9}};
  auto s = parse_scenario(ok);
  CHECK(s.model == "flat-torus");
  CHECK(s.samples == 100);
  CHECK(s.seed == 42);

  CHECK_THROWS_AS(parse_scenario(nlohmann::json{{"model", "x"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario(nlohmann::json{{"check", "theta-omega"}, {"tolerance", -1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario(nlohmann::json{{"check", "theta-omega"}, {"samples", 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario(nlohmann::json{{"check", "x"}, {"expect", "maybe"}}),
                  std::invalid_argument);
}

TEST_CASE("scenario runs are deterministic and thread-count independent") {
  nlohmann::json j = {{"model", "warped-torus"}, {"check", "theta-omega"},
                      {"potential", true},       {"tolerance", 1e-8},
                      {"samples", 12},           {"seed", 5}};
  Scenario s = parse_scenario(j);
  s.threads = 1;
  auto a = run_scenario(s);
  s.threads = 2;
  auto b = run_scenario(s);
  s.threads = 1;
  auto c = run_scenario(s);
  REQUIRE(a.residuals.size() == b.residuals.size());
  for (std::size_t i = 0; i < a.residuals.size(); ++i) {
    CHECK(a.residuals[i] == b.residuals[i]);  // bit-identical
    CHECK(a.residuals[i] == c.residuals[i]);
  }
  CHECK(a.pass);
}

TEST_CASE("exit code contract") {
  // 0 on pass
  nlohmann::json ok = {{"model", "flat-torus"}, {"check", "theta-omega"},
                       {"tolerance", 1e-8},     {"samples", 5},
                       {"seed", 2}};
  auto pass_rep = run_scenario(parse_scenario(ok));
  CHECK(pass_rep.exit_code() == 0);

  // 1 on tolerance failure
  nlohmann::json fail = {{"model", "warped-torus"}, {"check", "theta-omega"},
                         {"expect-theta-zero", true}, {"tolerance", 1e-8},
                         {"samples", 5},            {"seed", 2}};
  auto fail_rep = run_scenario(parse_scenario(fail));
  CHECK(fail_rep.exit_code() == 1);
  CHECK(fail_rep.outcome == "fail");

  // expected failures exit 0, unexpected passes exit 1
  fail["expect"] = "fail";
  auto exp_rep = run_scenario(parse_scenario(fail));
  CHECK(exp_rep.exit_code() == 0);
  CHECK(exp_rep.outcome == "expected-failure");

  ok["expect"] = "fail";
  auto unexp = run_scenario(parse_scenario(ok));
  CHECK(unexp.exit_code() == 1);
  CHECK(unexp.outcome == "unexpected-pass");

  // configuration errors throw (the CLI maps them to exit 2)
  nlohmann::json bad_model = {{"model", "nonexistent"}, {"check", "theta-omega"}};
  CHECK_THROWS_AS(run_scenario(parse_scenario(bad_model)), std::invalid_argument);
  nlohmann::json bad_check = {{"model", "flat-torus"}, {"check", "nope"}};
  CHECK_THROWS_AS(run_scenario(parse_scenario(bad_check)), std::invalid_argument);
}

TEST_CASE("report round trip") {
  nlohmann::json j = {{"model", "flat-torus"}, {"check", "theta-omega"},
                      {"tolerance", 1e-8},     {"samples", 6},
                      {"seed", 3},             {"report", "/tmp/vsub_report_test.json"}};
  auto rep = run_scenario(parse_scenario(j));
  std::ifstream in("/tmp/vsub_report_test.json");
  REQUIRE(in.good());
  nlohmann::json loaded = nlohmann::json::parse(in);
  CHECK(loaded.at("pass").get<bool>() == rep.pass);
  CHECK(loaded.at("check").get<std::string>() == "theta-omega");
  CHECK(loaded.at("residuals").size() == rep.residuals.size());
  // serialized residuals parse back to the exact doubles
  for (std::size_t i = 0; i < rep.residuals.size(); ++i)
    CHECK(loaded.at("residuals")[i].get<double>() == rep.residuals[i]);
  std::remove("/tmp/vsub_report_test.json");
}

TEST_CASE("rayleigh estimates") {
  SUBCASE("constant functions have zero quotient exactly") {
    auto m = get_model("circle-polar-sphere");
    std::map<Mask, ScalarField> c;
    c.emplace(Mask{0}, constant_field(3.0));
    FormField phi(m->base(), 0, std::move(c));
    auto est = monte_carlo_rayleigh(phi, 2000, 11);
    CHECK(est.estimate == 0.0);
    CHECK(est.stderror == 0.0);
  }

  SUBCASE("pullback quotient on the Hopf total space approaches 4") {
    auto m = get_model("hopf-bundle");
    FormField nu2 = named_base_form(m, "nu2");
    auto est = monte_carlo_rayleigh_pullback(m, nu2, 20000, 12);
    CHECK(std::abs(est.estimate - 4.0) < 3.0 * est.stderror + 1e-10);
  }

  SUBCASE("two seeds give different but consistent estimates") {
    auto m = get_model("circle-polar-sphere");
    FormField y1 = named_base_form(m, "y1");
    auto a = monte_carlo_rayleigh(y1, 30000, 21);
    auto b = monte_carlo_rayleigh(y1, 30000, 22);
    CHECK(a.estimate != b.estimate);
    CHECK(std::abs(a.estimate - 2.0) < 4.0 * a.stderror);
    CHECK(std::abs(b.estimate - 2.0) < 4.0 * b.stderror);
  }
}

TEST_CASE("inline model definitions") {
  // trig-family warped torus defined directly in the scenario
  nlohmann::json j = {{"model", {{"kind", "warped-torus"},
                                 {"fiber-scale",
                                  {{"constant", 2.0}, {"sin", 1.0}, {"cos", 0.0}}}}},
                      {"check", "theta-omega"},
                      {"potential", true},
                      {"tolerance", 1e-8},
                      {"samples", 8},
                      {"seed", 14}};
  auto rep = run_scenario(parse_scenario(j));
  CHECK(rep.pass);

  nlohmann::json bad = {{"model", {{"kind", "unknown-kind"}}}, {"check", "theta-omega"}};
  CHECK_THROWS_AS(run_scenario(parse_scenario(bad)), std::invalid_argument);
}

TEST_CASE("catalog serialization") {
  auto j = catalog_json();
  REQUIRE(j.is_array());
  bool found = false;
  for (const auto& e : j)
    if (e.at("name") == "hopf1-nu2") {
      found = true;
      CHECK(e.at("lambda").get<double>() == 0.0);
      CHECK(e.at("mu").get<double>() == 4.0);
      CHECK(e.at("provenance") == "literature");
    }
  CHECK(found);
}
