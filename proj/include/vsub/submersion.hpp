#pragma once

// Riemannian submersion structure: vertical/horizontal splitting, the mean
// curvature covector theta and horizontal curvature omega, the intertwining
// operator Xi = int(theta) + E with
//   E = sum_{a,b,i} omega_abi ext(e^i) int(f^a) int(f^b),
// the residual checks for the coderivative/Laplacian intertwining identities,
// fiber products, conformal variation of the vertical metric, and the
// fiber-volume potential characterization of theta.
//
// Frames: the split frame at a point is produced by one deterministic
// pipeline (column-pivoted kernel of dpi, then Gram-Schmidt against g with
// coordinate directions processed in ascending order), evaluated in jet
// arithmetic.  Because the pivot choices are locally constant in the chart,
// the same pipeline defines smooth frame *fields* near a generic point, and
// Lie brackets of those fields are exact jet derivatives.  theta and omega
// are frame-independent tensors; a random orthogonal remix of the frames is
// available as a cross-check.

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "vsub/calculus.hpp"

namespace vsub {

struct ModelFlags {
  bool bundle_form = false;  // projection is the coordinate projection onto the last base-dim coords
  bool fibers_minimal_expected = false;
  bool horizontal_integrable_expected = false;
  bool full_measure = false;  // chart covers the manifold up to measure zero
};

class SubmersionModel {
 public:
  SubmersionModel(std::string name, ChartPtr total, ChartPtr base,
                  std::vector<ScalarField> projection, ModelFlags flags)
      : name_(std::move(name)),
        total_(std::move(total)),
        base_(std::move(base)),
        projection_(std::move(projection)),
        flags_(flags) {
    if (static_cast<int>(projection_.size()) != base_->dim())
      throw std::invalid_argument("submersion: projection component count mismatch");
    if (total_->dim() <= base_->dim())
      throw std::invalid_argument("submersion: total dimension must exceed base dimension");
  }

  const std::string& name() const { return name_; }
  const ChartPtr& total() const { return total_; }
  const ChartPtr& base() const { return base_; }
  const std::vector<ScalarField>& projection() const { return projection_; }
  int total_dim() const { return total_->dim(); }
  int base_dim() const { return base_->dim(); }
  int fiber_dim() const { return total_dim() - base_dim(); }
  const ModelFlags& flags() const { return flags_; }

  JetVec project_jets(const JetVec& z) const {
    JetVec y;
    y.reserve(projection_.size());
    for (const auto& f : projection_) y.push_back(f(z));
    return y;
  }

  Point project(std::span<const double> z) const {
    JetVec seeds = seed_point(z, 1);
    Point y;
    for (const auto& f : projection_) y.push_back(f(seeds).value());
    return y;
  }

  /// Admissible upstairs and downstairs.
  bool admissible(const Point& z) const {
    if (!total_->admissible(z)) return false;
    return base_->admissible(project(z));
  }

 private:
  std::string name_;
  ChartPtr total_, base_;
  std::vector<ScalarField> projection_;
  ModelFlags flags_;
};

using ModelPtr = std::shared_ptr<const SubmersionModel>;

// -- frames -------------------------------------------------------------------

struct SplitFrameJets {
  Mat<Jet> vert, horiz;        // columns = frame vectors e_i, f_a
  Mat<Jet> vert_co, horiz_co;  // rows = coframe covectors e^i, f^a
};

struct SplitFrame {
  Matd vert, horiz, vert_co, horiz_co;
};

/// Orthogonal remixing of the split frame, used to confirm that theta and
/// omega are tensors (frame-choice independence).
struct FrameRemix {
  Matd q_vert, q_horiz;
};

FrameRemix random_remix(int fiber_dim, int base_dim, std::uint64_t seed);

SplitFrameJets split_frame_jets(const SubmersionModel& m, const JetVec& z, const Mat<Jet>& g,
                                const FrameRemix* remix = nullptr);

SplitFrame split_frame(const SubmersionModel& m, std::span<const double> z);

// -- submersion tensors ---------------------------------------------------------

struct ThetaOmega {
  int base_dim = 0, fiber_dim = 0, total_dim = 0;
  std::vector<double> theta_frame;   // against f^a
  std::vector<double> theta_coords;  // coordinate covector components
  std::vector<double> omega;         // omega_abi, a,b < base_dim, i < fiber_dim
  std::vector<double> omega_coords;  // coordinate 3-tensor (frame-independent)

  double om(int a, int b, int i) const {
    return omega[(static_cast<std::size_t>(a) * base_dim + b) * fiber_dim + i];
  }
  double theta_norm() const;
  double omega_norm() const;
};

ThetaOmega theta_omega(const SubmersionModel& m, std::span<const double> z,
                       const FrameRemix* remix = nullptr);

/// theta in the f^a coframe; zero iff the fibers are minimal at z.
Covector mean_curvature_theta(const SubmersionModel& m, std::span<const double> z);

/// omega_abi array; zero iff the horizontal distribution is integrable at z.
std::vector<double> curvature_omega(const SubmersionModel& m, std::span<const double> z);

// -- the intertwining operator -------------------------------------------------

/// Apply Xi = int(theta) + E to a form given in the split coframe
/// (vertical covectors first, then horizontal).  Generic over coefficients.
template <class T>
BasicForm<T> xi_apply_split(std::span<const T> theta_frame, std::span<const T> omega,
                            int base_dim, int fiber_dim, const BasicForm<T>& alpha) {
  const int mz = fiber_dim + base_dim;
  if (alpha.dim() != mz) throw std::invalid_argument("xi_apply: frame mismatch");

  CovectorT<T> th;
  th.comp.assign(mz, T{});
  for (int a = 0; a < base_dim; ++a) th.comp[fiber_dim + a] = theta_frame[a];
  BasicForm<T> out = int_mul(th, alpha);

  if (alpha.degree() < 2) return out;  // both interior factors of E need a covector

  auto basis_cov = [&](int k) {
    CovectorT<T> c;
    c.comp.assign(mz, T{});
    c.comp[k] = c.comp[k] + 1.0;
    return c;
  };
  for (int a = 0; a < base_dim; ++a)
    for (int b = 0; b < base_dim; ++b)
      for (int i = 0; i < fiber_dim; ++i) {
        const T& w = omega[(static_cast<std::size_t>(a) * base_dim + b) * fiber_dim + i];
        if (value_of(w) == 0.0 && is_plain(w)) continue;
        auto term = int_mul(basis_cov(fiber_dim + b), alpha);
        term = int_mul(basis_cov(fiber_dim + a), term);
        term = ext_mul(basis_cov(i), term);
        out += w * term;
      }
  return out;
}

/// Xi applied to a split-coframe form at a point.
MultiIndexForm xi_apply(const SubmersionModel& m, std::span<const double> z,
                        const MultiIndexForm& alpha_split);

// -- pullbacks ------------------------------------------------------------------

/// Coefficients of pi*phi at z, in total-chart coordinates, as jets.
FormJets pullback_form_jets(const SubmersionModel& m, const FormField& phi, const JetVec& z);

/// pi*phi as a form field on the total chart.
FormField pullback_form_field(ModelPtr m, const FormField& phi);

// -- residual checks -------------------------------------------------------------

struct IntertwinePoint {
  double delta_residual;        // coderivative identity with Xi correction
  double laplace_residual;      // Laplacian identity with (d Xi + Xi d) correction
  double commutation_residual;  // plain commutation defect of the Laplacians
};

IntertwinePoint intertwining_point(const SubmersionModel& m, const FormField& phi,
                                   std::span<const double> z);

/// Relative eigen-residual |L phi - lambda phi| / ((1+|lambda|) |phi|) of the
/// pulled-back form on the total space, metric norms.
double pullback_eigen_residual(const SubmersionModel& m, const FormField& phi, double mu,
                               std::span<const double> z);

/// Same for a form on its own chart (no pullback).
double eigen_residual(const FormField& phi, double lambda, std::span<const double> x);

/// Riemannian-submersion defect at z: max |g_Y(dpi f_a, dpi f_b) - delta_ab|.
double submersion_isometry_residual(const SubmersionModel& m, std::span<const double> z);

// -- constructions -----------------------------------------------------------------

/// Fiber product of two bundle-form models over the same base chart.
/// Metric: fiber blocks from the factors, horizontal block = base metric.
ModelPtr fiber_product(const ModelPtr& m1, const ModelPtr& m2, std::string name);

/// sigma_i* theta_i additivity defect at z on a fiber product.
double fiber_product_theta_residual(const SubmersionModel& prod, const SubmersionModel& m1,
                                    const SubmersionModel& m2, std::span<const double> z);

/// Scale the vertical metric by psi(y)^{2t}, leaving the horizontal metric
/// unchanged (bundle-form models).
ModelPtr conformal_variation(const ModelPtr& m, ScalarField psi_on_base, double t,
                             std::string name);

/// Extend a submersion by an untouched circle factor appended to base and
/// total space.
ModelPtr product_with_circle(const ModelPtr& m, std::string name);

/// Fiber volume y -> integral of sqrt(det g_xx(., y)) over the fiber box,
/// as a jet-evaluable field on the base (trapezoid quadrature).
ScalarField fiber_volume_field(const ModelPtr& m, int nodes = 256);

struct PotentialResidual {
  double residual;    // |theta + pi* d ln psi| relative
  double quad_delta;  // quadrature self-consistency (nodes vs doubled nodes)
};

/// theta = -pi* d_Y ln psi with psi the fiber volume computed by trapezoid
/// quadrature over the fiber coordinate box (>= nodes points per dimension).
PotentialResidual minimality_potential_residual(const SubmersionModel& m,
                                                std::span<const double> z, int nodes = 256);

}  // namespace vsub
