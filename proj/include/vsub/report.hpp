#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "vsub/chart.hpp"

namespace vsub {

/// Residual/pass-fail record of one scenario run.  pass is the raw
/// tolerance verdict; outcome folds in the expectation ("expected-failure"
/// exits 0, "unexpected-pass" exits 1).
struct VerificationReport {
  nlohmann::json scenario_echo;
  std::string check;
  double tolerance = 0.0;
  bool pass = false;
  std::string expect = "pass";
  std::string outcome;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  Point argmax_point;
  std::vector<double> residuals;
  double wall_ms = 0.0;
  nlohmann::json metadata;

  nlohmann::json to_json() const;
  int exit_code() const;  // 0 ok, 1 tolerance failure
};

}  // namespace vsub
