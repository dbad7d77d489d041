#pragma once

// Charted Riemannian manifolds.  A chart is a single coordinate box with an
// excluded set (singular loci, seams) given by distance gauges; atlases are
// families of charts with all sampling confined to one chart at a time.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsub/forms.hpp"
#include "vsub/jet.hpp"
#include "vsub/linalg.hpp"

namespace vsub {

using Point = std::vector<double>;

/// A scalar field in chart coordinates: consumes the coordinate jets and
/// produces the field value as a jet via jet arithmetic.  Fields are written
/// generically, so composing them through another jet-valued map is just
/// function application.
using ScalarField = std::function<Jet(const JetVec&)>;

/// Full metric matrix as jets.
using MetricField = std::function<Mat<Jet>(const JetVec&)>;

struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x, double margin) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < lo[i] + margin || x[i] > hi[i] - margin) return false;
    return true;
  }
};

/// One excluded locus with a distance-like gauge: admissible points keep
/// gauge(x) above the sampling margin.  Affine subspaces get the exact
/// distance; other loci supply a custom smooth gauge vanishing on the set.
struct ExclusionZone {
  std::string label;
  int codim = 2;
  std::function<double(std::span<const double>)> gauge;

  static ExclusionZone affine(std::string label, Point anchor,
                              std::vector<Point> normals) {
    // orthonormalize the normal directions (Euclidean)
    auto ip = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    auto on = gram_schmidt(normals, ip);
    ExclusionZone z;
    z.label = std::move(label);
    z.codim = static_cast<int>(on.size());
    z.gauge = [anchor = std::move(anchor), on = std::move(on)](std::span<const double> x) {
      double s = 0;
      for (const auto& n : on) {
        double proj = 0;
        for (std::size_t i = 0; i < n.size(); ++i) proj += n[i] * (x[i] - anchor[i]);
        s += proj * proj;
      }
      return std::sqrt(s);
    };
    return z;
  }
};

inline constexpr double kExclusionMargin = 1e-2;  // sampling keeps this distance

class MetricChart {
 public:
  MetricChart(int dim, Box sample_box, MetricField metric)
      : dim_(dim), sample_box_(std::move(sample_box)), metric_(std::move(metric)) {
    if (sample_box_.dim() != dim) throw std::invalid_argument("chart box dimension mismatch");
  }

  int dim() const { return dim_; }
  const Box& sample_box() const { return sample_box_; }
  double boundary_margin() const { return boundary_margin_; }
  const std::vector<ExclusionZone>& excluded() const { return excluded_; }
  const std::vector<ScalarField>& embedding() const { return embedding_; }

  void set_boundary_margin(double m) { boundary_margin_ = m; }
  void add_exclusion(ExclusionZone z) { excluded_.push_back(std::move(z)); }
  void set_domain_unbounded() { domain_bounded_ = false; }
  void set_embedding(std::vector<ScalarField> e) { embedding_ = std::move(e); }

  bool admissible(std::span<const double> x, double margin = kExclusionMargin) const {
    if (static_cast<int>(x.size()) != dim_) return false;
    if (domain_bounded_ && !sample_box_.contains(x, boundary_margin_)) return false;
    for (const auto& z : excluded_)
      if (z.gauge(x) <= margin) return false;
    return true;
  }

  Mat<Jet> metric_jets(const JetVec& x) const { return metric_(x); }

  Mat<Jet> metric_jets_at(std::span<const double> x, int order) const {
    return metric_(seed_point(x, order));
  }

  Matd metric_at(std::span<const double> x) const {
    auto gj = metric_jets_at(x, 1);
    Matd g(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) g(i, j) = gj(i, j).value();
    return g;
  }

 private:
  int dim_;
  Box sample_box_;
  double boundary_margin_ = kExclusionMargin;
  bool domain_bounded_ = true;  // when false the box only bounds sampling
  std::vector<ExclusionZone> excluded_;
  MetricField metric_;
  std::vector<ScalarField> embedding_;
};

using ChartPtr = std::shared_ptr<const MetricChart>;

/// Evaluated coefficients of a p-form, one jet per increasing tuple.
using FormJets = std::map<Mask, Jet>;

/// A p-form field in chart coordinates.  Stored as one scalar field per
/// increasing coordinate-index tuple; evaluation produces all coefficients
/// as jets at once.
class FormField {
 public:
  FormField(ChartPtr chart, int degree, std::map<Mask, ScalarField> coeffs)
      : chart_(std::move(chart)), degree_(degree), coeffs_(std::move(coeffs)) {
    for (const auto& [m, f] : coeffs_)
      if (mask_degree(m) != degree_) throw std::invalid_argument("form field: tuple degree mismatch");
  }

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  int dim() const { return chart_->dim(); }
  const std::map<Mask, ScalarField>& coefficient_fields() const { return coeffs_; }

  FormJets eval_jets(const JetVec& x) const {
    FormJets out;
    for (const auto& [m, f] : coeffs_) out.emplace(m, f(x));
    return out;
  }

  MultiIndexForm eval(std::span<const double> x, int order = 1) const {
    JetVec seeds = seed_point(x, order);
    MultiIndexForm out(degree_, dim());
    for (const auto& [m, f] : coeffs_) out.add(m, f(seeds).value());
    return out;
  }

 private:
  ChartPtr chart_;
  int degree_;
  std::map<Mask, ScalarField> coeffs_;
};

class VectorField {
 public:
  VectorField(ChartPtr chart, std::vector<ScalarField> comps)
      : chart_(std::move(chart)), comps_(std::move(comps)) {
    if (static_cast<int>(comps_.size()) != chart_->dim())
      throw std::invalid_argument("vector field: component count mismatch");
  }

  const ChartPtr& chart() const { return chart_; }
  int dim() const { return chart_->dim(); }

  std::vector<Jet> eval_jets(const JetVec& x) const {
    std::vector<Jet> out;
    out.reserve(comps_.size());
    for (const auto& f : comps_) out.push_back(f(x));
    return out;
  }

 private:
  ChartPtr chart_;
  std::vector<ScalarField> comps_;
};

// -- small field constructors ------------------------------------------------

inline ScalarField constant_field(double v) {
  return [v](const JetVec&) { return Jet(v); };
}

inline ScalarField coordinate_field(int k) {
  return [k](const JetVec& x) { return x.at(k); };
}

/// Polynomial in the chart coordinates: terms of (exponent vector, coeff).
struct PolyTerm {
  std::vector<int> exps;
  double coeff;
};

inline ScalarField polynomial_field(std::vector<PolyTerm> terms) {
  return [terms = std::move(terms)](const JetVec& x) {
    Jet s;
    for (const auto& t : terms) {
      Jet m(t.coeff);
      for (std::size_t v = 0; v < t.exps.size(); ++v)
        for (int e = 0; e < t.exps[v]; ++e) m = m * x[v];
      s += m;
    }
    return s;
  };
}

}  // namespace vsub
