#pragma once

// Finite isometry actions on charts in linearized coordinates: cyclic
// actions by blockwise complex rotations, group-axiom and isometry checks,
// fixed-point data, and the invariance/equivariance residuals that realize
// the quotient-eigenform criterion operationally.  Quotient spaces are never
// materialized; everything happens on desingularizing charts.

#include <span>
#include <string>
#include <vector>

#include "vsub/chart.hpp"

namespace vsub {

struct GroupAction {
  ChartPtr chart;
  std::vector<Matd> elements;  // elements[0] is the identity
  std::vector<std::string> labels;

  int dim() const { return chart->dim(); }
  int order() const { return static_cast<int>(elements.size()); }
};

/// Z_n acting by rotations with the given integer weights on consecutive
/// complex coordinate pairs; remaining coordinates are fixed.
GroupAction cyclic_action(int n, const std::vector<int>& weights, ChartPtr chart);

/// (a, b) with a*p - b*q = 1, gcd(p, q) = 1.  Canonical representative:
/// 1 <= a <= q chosen as the inverse of p mod q (a = 1 when q = 1).
std::pair<long, long> bezout(long p, long q);

struct FixedPointData {
  int fixed_dim;      // dimension of the eigenvalue-1 eigenspace
  int codim;
  int element_order;  // order of the element in the matrix group
};

FixedPointData fixed_point_data(const Matd& gamma, double tol = 1e-9);

/// Number of group elements fixing the point.
int isotropy_order(const GroupAction& a, std::span<const double> x, double tol = 1e-9);

/// Worst defect of closure/identity/inverses under matrix product.
double group_axioms_residual(const GroupAction& a);

/// Worst defect of gamma* g = g over sampled points.
double isometry_residual(const GroupAction& a, int npoints, std::uint64_t seed);

/// Points whose full orbit stays admissible.
std::vector<Point> sample_orbit_points(const GroupAction& a, int n, std::uint64_t seed);

struct ResidualSeries {
  std::vector<double> residuals;  // one per sample point (max over elements)
  double max_residual = 0.0;
  double mean_residual = 0.0;
  Point argmax;
};

/// max over gamma, points of |pullback(gamma, phi(gamma x)) - phi(x)|.
ResidualSeries invariance_residual(const GroupAction& a, const FormField& phi,
                                   const std::vector<Point>& pts);

/// max over matched elements, points of |map(A_k z) - B_k map(z)|.
ResidualSeries equivariance_residual(const GroupAction& upstairs, const GroupAction& downstairs,
                                     const std::vector<ScalarField>& map,
                                     const std::vector<Point>& pts);

/// The Hopf map as an ambient map R^4 -> R^3.
std::vector<ScalarField> hopf_ambient_map();

/// Ambient chart R^m (Euclidean metric) with the origin excluded.
ChartPtr ambient_chart(int m, double half_width = 1.25);

/// The volume form of the radius-1/2 sphere extended to ambient R^3 minus
/// the origin (degree-0 homogeneous, rotation invariant).
FormField ambient_nu2(ChartPtr chart3);

}  // namespace vsub
