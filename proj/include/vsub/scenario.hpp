#pragma once

// Scenario-driven verification harness.  A scenario names a model, a check
// kind, a tolerance, a sample count and a seed; the runner dispatches to the
// module operations, aggregates per-point residuals in deterministic sample
// order (parallel execution does not change the list), and produces a
// machine-readable report.
//
// Check kinds: intertwining | eigen-residual | invariance | equivariance |
// theta-omega | fiber-product | conformal | rayleigh.

#include <json.hpp>
#include <string>

#include "vsub/report.hpp"

namespace vsub {

struct Scenario {
  std::string name;
  std::string model;
  std::string check;
  double tolerance = 1e-7;
  int samples = 100;
  std::uint64_t seed = 42;
  std::string expect = "pass";  // "pass" or "fail"
  std::string report_path;
  int threads = 0;              // 0 = hardware concurrency
  nlohmann::json extra;         // check-specific fields (echoed into the report)
};

/// Throws std::invalid_argument on malformed configuration.
Scenario parse_scenario(const nlohmann::json& j);

VerificationReport run_scenario(const Scenario& s);

/// Catalog serialized to the report format (names, lambda, mu, provenance).
nlohmann::json catalog_json();

}  // namespace vsub
