#pragma once

// Closed-form model catalog: spheres in stereographic and polar charts, Hopf
// fibrations over Fubini-Study charts, warped tori, product and fiber-product
// constructions, and the named eigenforms with their expected eigenvalues.

#include <string>
#include <vector>

#include "vsub/submersion.hpp"

namespace vsub {

// -- charts ---------------------------------------------------------------------

ChartPtr euclidean_chart(int m, double half_width = 2.0);

/// Stereographic chart of the radius-r sphere S^m, metric 4r^2/(1+|u|^2)^2 I,
/// with the embedding map attached.
ChartPtr sphere_model(int m, double r, bool south = false, double box_half = 1.6);

/// Polar chart of the radius-r 2-sphere (colatitude, azimuth); covers the
/// sphere up to measure zero, used for global integration.
ChartPtr polar_sphere_chart(double r);

ChartPtr circle_chart();

/// Affine chart of CP^n with the Fubini-Study metric normalized so that the
/// Hopf projection from the unit round sphere is a Riemannian submersion
/// (n = 1 gives the radius-1/2 round 2-sphere).
ChartPtr fubini_study_chart(int n);

// -- models -----------------------------------------------------------------------

/// Z = S^1 x S^1 with ds^2 = f(y)^2 dx^2 + dy^2 over Y = S^1.
ModelPtr warped_torus_model(ScalarField f, std::string name = "warped-torus");
ModelPtr flat_torus_model();

/// Hopf fibration S^{2n+1} -> CP^n in stereographic/affine charts.  The
/// Riemannian-submersion property is verified at construction; failure is
/// fatal.
ModelPtr hopf_model(int n, bool south = false);

/// The n=1 Hopf fibration in fiber-adapted angular coordinates (s, eta, phi)
/// with projection onto (eta, phi); bundle-form and full-measure, the chart
/// used for fiber products and Monte Carlo integration.
ModelPtr hopf_bundle_model();

/// S^1 x S^2(1/2) -> S^2(1/2), product metric, stereographic base.
ModelPtr circle_sphere_product_model();

/// S^1 x S^2(1) -> S^2(1) over the polar chart (full measure).
ModelPtr circle_polar_sphere_model();

// -- named forms --------------------------------------------------------------------

/// Riemannian volume form of a chart.
FormField volume_form(ChartPtr chart);

/// Kaehler form of the Fubini-Study chart on CP^n.
FormField fs_kaehler_form(ChartPtr chart, int n);

/// Restriction of a polynomial in the embedding coordinates to a chart with
/// an embedding map (spherical harmonics are harmonic-polynomial
/// restrictions).
ScalarField embedded_polynomial(ChartPtr chart, std::vector<PolyTerm> poly);

/// Base form for a model by key: "nu2", "mu2", "mu2-wedge-2", "y1", "sin-y",
/// "volume".  Unknown keys or unsupported model/key pairs throw.
FormField named_base_form(const ModelPtr& model, const std::string& key);

// -- catalog ---------------------------------------------------------------------------

struct CatalogEntry {
  std::string name;        // entry id, kebab-case
  std::string model;       // model registry key
  std::string form;        // named_base_form key
  int degree;              // p
  double lambda;           // base eigenvalue
  double mu;               // expected total-space eigenvalue of the pullback
  std::string provenance;  // "literature" or "derived"
};

const std::vector<CatalogEntry>& eigenform_catalog();

/// Model registry (cached): flat-torus, warped-torus, warped-torus-b, hopf-1,
/// hopf-1-south, hopf-2, hopf-bundle, fiber-product-s3s3,
/// fiber-product-warped, circle-sphere-product, circle-polar-sphere,
/// hopf-1-x-circle.
ModelPtr get_model(const std::string& name);

std::vector<std::string> model_names();

}  // namespace vsub
