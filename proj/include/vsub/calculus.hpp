#pragma once

// Pointwise exterior calculus on metric charts: orthonormal coframes, Lie
// brackets, exterior derivative, codifferential (via covariant divergence)
// and the form Laplacian dd* + d*d with the non-negative sign convention.

#include <span>

#include "vsub/chart.hpp"

namespace vsub {

struct MetricJets {
  Mat<Jet> g, ginv;
  std::vector<Mat<Jet>> gamma;  // gamma[k](i,j) = Gamma^k_ij
  Jet det;
};

MetricJets metric_jets(const MetricChart& chart, const JetVec& x, bool need_christoffel = true);

/// Signed lookup of a general-index component of an alternating form stored
/// on increasing tuples.  idx holds 0-based coordinate indices; returns
/// {mask, sign} with sign 0 when an index repeats.
std::pair<Mask, int> sort_index(std::span<const int> idx);

// jet-level kernels; a missing mask means coefficient zero
FormJets d_jets(const FormJets& F, int degree, int dim);
FormJets delta_jets(const FormJets& F, int degree, int dim, const MetricJets& M);
FormJets laplacian_jets(const FormJets& F, int degree, int dim, const MetricJets& M);

MultiIndexForm form_values(const FormJets& F, int degree, int dim);

// pointwise operations on form fields
MultiIndexForm exterior_derivative(const FormField& w, std::span<const double> x, int order = 2);
MultiIndexForm codifferential(const FormField& w, std::span<const double> x, int order = 2);
MultiIndexForm laplacian(const FormField& w, std::span<const double> x, int order = 2);

struct OrthoCoframe {
  Matd co;     // row j = coframe covector theta^j in coordinate components
  Matd frame;  // column j = dual frame vector
};

/// Gram-Schmidt on the coordinate covectors dx^1, dx^2, ... against g^{-1},
/// processed in ascending index order.
OrthoCoframe orthonormal_coframe(const MetricChart& chart, std::span<const double> x);

/// Components of a coordinate-expressed form in the orthonormal coframe.
MultiIndexForm to_orthonormal(const OrthoCoframe& cf, const MultiIndexForm& coords);

/// Metric norm of a coordinate-expressed form at a point.
double metric_norm(const MetricChart& chart, std::span<const double> x, const MultiIndexForm& a);

std::vector<double> lie_bracket(const VectorField& X, const VectorField& Y,
                                std::span<const double> x);

/// Sectional (Gauss) curvature of a 2-dimensional chart.
double gauss_curvature(const MetricChart& chart, std::span<const double> x);

/// All increasing index tuples of the given size as masks, ascending.
std::vector<Mask> increasing_masks(int dim, int degree);

}  // namespace vsub
