// Scenario-driven verification CLI.
// Exit codes: 0 pass (or expected failure), 1 tolerance failure, 2
// configuration error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "vsub/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pointwise verification of submersion/eigenform identities on closed-form models"};
  app.name("verify");

  std::string scenario_path, report_path;
  int samples = -1;
  long long seed = -1;
  double tolerance = -1;
  int threads = -1;
  bool list_catalog = false;

  app.add_option("--scenario", scenario_path, "scenario JSON file");
  app.add_option("--samples", samples, "override sample count");
  app.add_option("--seed", seed, "override RNG seed");
  app.add_option("--tolerance", tolerance, "override tolerance");
  app.add_option("--report", report_path, "write the JSON report here");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_flag("--list-catalog", list_catalog, "print the eigenform catalog and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_catalog) {
      std::cout << vsub::catalog_json().dump(2) << "\n";
      return 0;
    }
    if (scenario_path.empty()) {
      std::cerr << "error: --scenario is required (or --list-catalog)\n";
      return 2;
    }
    std::ifstream in(scenario_path);
    if (!in.good()) {
      std::cerr << "error: cannot read scenario file " << scenario_path << "\n";
      return 2;
    }
    nlohmann::json j = nlohmann::json::parse(in);
    vsub::Scenario s = vsub::parse_scenario(j);
    if (samples > 0) s.samples = samples;
    if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
    if (tolerance > 0) s.tolerance = tolerance;
    if (threads >= 0) s.threads = threads;
    if (!report_path.empty()) s.report_path = report_path;

    vsub::VerificationReport rep = vsub::run_scenario(s);
    std::printf("%s %s: check=%s max-residual=%.6e tolerance=%.3e (%.1f ms)\n",
                rep.outcome == "pass" || rep.outcome == "expected-failure" ? "OK" : "FAIL",
                rep.outcome.c_str(), rep.check.c_str(), rep.max_residual, rep.tolerance,
                rep.wall_ms);
    if (s.report_path.empty()) std::cout << rep.to_json().dump(2) << "\n";
    return rep.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
