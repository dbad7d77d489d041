#pragma once

// Monte Carlo estimate of the Rayleigh quotient
//   ( |d phi|^2 + |delta phi|^2 ) integrated  /  |phi|^2 integrated
// over a chart that covers the manifold up to measure zero, with the
// Riemannian volume density as the importance weight and the delta-method
// standard error of the ratio estimator.

#include <cstdint>
#include <functional>

#include "vsub/chart.hpp"
#include "vsub/submersion.hpp"

namespace vsub {

struct RayleighEstimate {
  double estimate = 0.0;
  double stderror = 0.0;
  long samples = 0;
  long used = 0;  // admissible samples
};

using FormEvaluator = std::function<FormJets(const JetVec&)>;

RayleighEstimate monte_carlo_rayleigh(const MetricChart& chart, int degree,
                                      const FormEvaluator& phi, long n, std::uint64_t seed,
                                      int threads = 0);

/// Rayleigh quotient of a form field on its own chart.
RayleighEstimate monte_carlo_rayleigh(const FormField& phi, long n, std::uint64_t seed,
                                      int threads = 0);

/// Rayleigh quotient of pi* phi on the total space of a model.
RayleighEstimate monte_carlo_rayleigh_pullback(const ModelPtr& model, const FormField& phi,
                                               long n, std::uint64_t seed, int threads = 0);

}  // namespace vsub
