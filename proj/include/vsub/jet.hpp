#pragma once

// Truncated multivariate Taylor expansions ("jets") used as the exact
// differentiation engine.  A Jet represents the Taylor polynomial of a
// scalar quantity at the current evaluation point, truncated at a given
// total order; arithmetic, analytic functions and composition propagate the
// expansion exactly through that order.  Every derivative used anywhere in
// the library (exterior derivative, Christoffel symbols, Lie brackets of
// frame fields, ...) is extracted from jets, never from finite differences.
//
// Representation: coefficients are stored against a per-(nvars, max_order)
// MonomialTable that enumerates exponent multi-indices in graded order.  A
// coefficient c_alpha equals d^alpha f / alpha! at the base point.  The base
// point itself is implicit: jets are always produced by seeding coordinate
// variables at a concrete point.
//
// A default-constructed Jet (or Jet(v)) is a detached scalar: a constant
// whose derivatives of every order vanish.  Scalars mix freely with tabled
// jets, which keeps code paths like "numeric quadrature node times jet in
// the base variables" natural.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace vsub {

inline constexpr int kMaxJetVars = 6;
inline constexpr int kDefaultJetOrder = 4;
inline constexpr int kScalarOrder = std::numeric_limits<int>::max() / 2;

class MonomialTable {
 public:
  MonomialTable(int nvars, int max_order) : nvars_(nvars), max_order_(max_order) {
    if (nvars < 1 || nvars > kMaxJetVars)
      throw std::invalid_argument("jet variable count out of range");
    if (max_order < 1) throw std::invalid_argument("jet order must be >= 1");

    // graded enumeration: degree 0, 1, ..., max_order; deterministic within
    // each degree (first variable most significant).
    std::array<std::uint8_t, kMaxJetVars> e{};
    count_by_order_.assign(max_order + 1, 0);
    for (int d = 0; d <= max_order; ++d) {
      enumerate(e, 0, d);
      count_by_order_[d] = static_cast<int>(exps_.size());
    }

    const int n = size();
    index_.reserve(n * 2);
    for (int i = 0; i < n; ++i) index_.emplace(pack(exps_[i]), i);

    prod_.assign(static_cast<std::size_t>(n) * n, -1);
    up_.assign(static_cast<std::size_t>(n) * nvars, -1);
    parent_var_.assign(n, -1);
    parent_idx_.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (degree_of(i) + degree_of(j) > max_order) continue;
        auto s = exps_[i];
        for (int v = 0; v < nvars; ++v) s[v] = static_cast<std::uint8_t>(s[v] + exps_[j][v]);
        prod_[static_cast<std::size_t>(i) * n + j] = index_.at(pack(s));
      }
      for (int v = 0; v < nvars; ++v) {
        if (degree_of(i) + 1 > max_order) continue;
        auto s = exps_[i];
        ++s[v];
        up_[static_cast<std::size_t>(i) * nvars + v] = index_.at(pack(s));
      }
      if (i > 0) {
        int v = 0;
        while (exps_[i][v] == 0) ++v;
        parent_var_[i] = v;
        auto s = exps_[i];
        --s[v];
        parent_idx_[i] = index_.at(pack(s));
      }
    }
  }

  int nvars() const { return nvars_; }
  int max_order() const { return max_order_; }
  int size() const { return static_cast<int>(exps_.size()); }
  int count(int order) const {
    if (order < 0) return 0;
    if (order >= max_order_) return size();
    return count_by_order_[order];
  }
  const std::array<std::uint8_t, kMaxJetVars>& exps(int i) const { return exps_[i]; }
  int degree_of(int i) const {
    int d = 0;
    for (int v = 0; v < nvars_; ++v) d += exps_[i][v];
    return d;
  }
  int prod(int i, int j) const { return prod_[static_cast<std::size_t>(i) * size() + j]; }
  int up(int i, int v) const { return up_[static_cast<std::size_t>(i) * nvars_ + v]; }
  int parent_var(int i) const { return parent_var_[i]; }
  int parent_idx(int i) const { return parent_idx_[i]; }

  int index_of(std::span<const int> alpha) const {
    std::array<std::uint8_t, kMaxJetVars> e{};
    int d = 0;
    for (int v = 0; v < nvars_ && v < static_cast<int>(alpha.size()); ++v) {
      e[v] = static_cast<std::uint8_t>(alpha[v]);
      d += alpha[v];
    }
    if (d > max_order_) return -1;
    auto it = index_.find(pack(e));
    return it == index_.end() ? -1 : it->second;
  }

 private:
  void enumerate(std::array<std::uint8_t, kMaxJetVars>& e, int v, int remaining) {
    if (v == nvars_ - 1) {
      e[v] = static_cast<std::uint8_t>(remaining);
      exps_.push_back(e);
      e[v] = 0;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[v] = static_cast<std::uint8_t>(k);
      enumerate(e, v + 1, remaining - k);
    }
    e[v] = 0;
  }

  static std::uint64_t pack(const std::array<std::uint8_t, kMaxJetVars>& e) {
    std::uint64_t k = 0;
    for (int v = 0; v < kMaxJetVars; ++v) k |= static_cast<std::uint64_t>(e[v]) << (8 * v);
    return k;
  }

  int nvars_, max_order_;
  std::vector<std::array<std::uint8_t, kMaxJetVars>> exps_;
  std::vector<int> count_by_order_;
  std::unordered_map<std::uint64_t, int> index_;
  std::vector<std::int32_t> prod_;
  std::vector<std::int32_t> up_;
  std::vector<std::int32_t> parent_var_, parent_idx_;
};

/// Shared table registry; tables live for the process lifetime.
inline const MonomialTable& monomial_table(int nvars, int max_order = kDefaultJetOrder) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<MonomialTable>> cache;
  std::scoped_lock lock(mu);
  auto key = std::make_pair(nvars, max_order);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<MonomialTable>(nvars, max_order)).first;
  return *it->second;
}

class Jet {
 public:
  Jet() : tab_(nullptr), order_(kScalarOrder), c_(1, 0.0) {}
  explicit Jet(double v) : tab_(nullptr), order_(kScalarOrder), c_(1, v) {}

  static Jet constant(const MonomialTable& t, double v, int order) {
    Jet j;
    j.tab_ = &t;
    j.order_ = clamp_order(t, order);
    j.c_.assign(t.count(j.order_), 0.0);
    j.c_[0] = v;
    return j;
  }

  static Jet variable(const MonomialTable& t, int var, double value, int order) {
    if (var < 0 || var >= t.nvars()) throw std::invalid_argument("jet variable index out of range");
    Jet j = constant(t, value, order);
    if (j.order_ < 1) throw std::invalid_argument("jet variable needs order >= 1");
    std::array<int, kMaxJetVars> alpha{};
    alpha[var] = 1;
    j.c_[t.index_of(std::span<const int>(alpha.data(), t.nvars()))] = 1.0;
    return j;
  }

  bool is_scalar() const { return tab_ == nullptr; }
  double value() const { return c_[0]; }
  int order() const { return order_; }
  const MonomialTable* table() const { return tab_; }

  /// d^alpha f at the base point (coefficient times alpha!).
  double deriv(std::span<const int> alpha) const {
    int d = 0;
    double fact = 1.0;
    for (std::size_t v = 0; v < alpha.size(); ++v) {
      d += alpha[v];
      for (int k = 2; k <= alpha[v]; ++k) fact *= k;
    }
    if (is_scalar()) return d == 0 ? c_[0] : 0.0;
    if (d > order_) throw std::logic_error("jet: derivative order exceeds truncation order");
    int idx = tab_->index_of(alpha);
    if (idx < 0 || idx >= static_cast<int>(c_.size())) return 0.0;
    return c_[idx] * fact;
  }

  /// Partial derivative as a jet one order lower.
  Jet partial(int v) const {
    if (is_scalar()) return Jet();
    if (order_ < 1) throw std::logic_error("jet: cannot differentiate an order-0 jet");
    Jet out = constant(*tab_, 0.0, order_ - 1);
    const int n = static_cast<int>(out.c_.size());
    for (int i = 0; i < n; ++i) {
      int src = tab_->up(i, v);
      if (src >= 0 && src < static_cast<int>(c_.size()))
        out.c_[i] = c_[src] * (tab_->exps(src)[v]);
    }
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (double& x : out.c_) x = -x;
    return out;
  }

  Jet& operator+=(const Jet& o) { return combine(o, +1); }
  Jet& operator-=(const Jet& o) { return combine(o, -1); }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& x : c_) x *= s;
    return *this;
  }
  Jet& operator/=(double s) { return (*this) *= (1.0 / s); }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, const Jet& b) { return -b + a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(Jet a, double b) { return a /= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.is_scalar()) {
      Jet out = b;
      return out *= a.value();
    }
    if (b.is_scalar()) {
      Jet out = a;
      return out *= b.value();
    }
    if (a.tab_ != b.tab_) throw std::invalid_argument("jet: table mismatch in product");
    const MonomialTable& t = *a.tab_;
    int ord = std::min(a.order_, b.order_);
    Jet out = constant(t, 0.0, ord);
    const int na = t.count(std::min(a.order_, ord));
    for (int i = 0; i < na && i < static_cast<int>(a.c_.size()); ++i) {
      if (a.c_[i] == 0.0) continue;
      const int di = t.degree_of(i);
      const int nb = std::min<int>(t.count(ord - di), static_cast<int>(b.c_.size()));
      const double ai = a.c_[i];
      for (int j = 0; j < nb; ++j) {
        if (b.c_[j] == 0.0) continue;
        out.c_[t.prod(i, j)] += ai * b.c_[j];
      }
    }
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double a, const Jet& b) { return reciprocal(b) * a; }

  /// Composition with an analytic scalar function given by its derivatives
  /// at value(): derivs[k] = f^(k)(value()), k = 0..order.
  Jet apply_series(std::span<const double> derivs) const {
    if (is_scalar()) return Jet(derivs[0]);
    const int K = std::min<int>(order_, static_cast<int>(derivs.size()) - 1);
    Jet w = *this;
    w.c_[0] = 0.0;
    Jet r = constant(*tab_, derivs[K] / factorial(K), order_);
    for (int k = K - 1; k >= 0; --k) {
      r = r * w;
      r += derivs[k] / factorial(k);
    }
    return r;
  }

  /// Forget information above the given order.
  Jet truncated(int order) const {
    if (is_scalar() || order >= order_) return *this;
    Jet out = *this;
    out.order_ = std::max(order, 0);
    out.c_.resize(tab_->count(out.order_));
    return out;
  }

  friend Jet reciprocal(const Jet& a) {
    double v = a.value();
    if (v == 0.0) throw std::domain_error("jet: division by zero value");
    if (a.is_scalar()) return Jet(1.0 / v);
    std::vector<double> d(a.order_ + 1);
    double p = 1.0 / v;
    double sign = 1.0, fact = 1.0;
    for (int k = 0; k <= a.order_; ++k) {
      d[k] = sign * fact * p;
      p /= v;
      sign = -sign;
      fact *= (k + 1);
    }
    return a.apply_series(d);
  }

  friend Jet sqrt(const Jet& a) {
    double v = a.value();
    if (v <= 0.0) throw std::domain_error("jet: sqrt of non-positive value");
    if (a.is_scalar()) return Jet(std::sqrt(v));
    std::vector<double> d(a.order_ + 1);
    const double e = 0.5;
    double run = std::sqrt(v);
    for (int k = 0; k <= a.order_; ++k) {
      d[k] = run;
      run *= (e - k) / v;
    }
    return a.apply_series(d);
  }

  friend Jet pow(const Jet& a, double e) {
    double v = a.value();
    if (v <= 0.0) throw std::domain_error("jet: pow of non-positive value");
    if (a.is_scalar()) return Jet(std::pow(v, e));
    std::vector<double> d(a.order_ + 1);
    double run = std::pow(v, e);
    for (int k = 0; k <= a.order_; ++k) {
      d[k] = run;
      run *= (e - k);
      run /= v;
    }
    return a.apply_series(d);
  }

  friend Jet exp(const Jet& a) {
    double v = std::exp(a.value());
    if (a.is_scalar()) return Jet(v);
    std::vector<double> d(a.order_ + 1, v);
    return a.apply_series(d);
  }

  friend Jet log(const Jet& a) {
    double v = a.value();
    if (v <= 0.0) throw std::domain_error("jet: log of non-positive value");
    if (a.is_scalar()) return Jet(std::log(v));
    std::vector<double> d(a.order_ + 1);
    d[0] = std::log(v);
    double run = 1.0 / v, sign = 1.0, fact = 1.0;
    for (int k = 1; k <= a.order_; ++k) {
      d[k] = sign * fact * run;
      run /= v;
      sign = -sign;
      fact *= k;
    }
    return a.apply_series(d);
  }

  friend Jet sin(const Jet& a) {
    if (a.is_scalar()) return Jet(std::sin(a.value()));
    double s = std::sin(a.value()), c = std::cos(a.value());
    std::vector<double> d(a.order_ + 1);
    const double cycle[4] = {s, c, -s, -c};
    for (int k = 0; k <= a.order_; ++k) d[k] = cycle[k % 4];
    return a.apply_series(d);
  }

  friend Jet cos(const Jet& a) {
    if (a.is_scalar()) return Jet(std::cos(a.value()));
    double s = std::sin(a.value()), c = std::cos(a.value());
    std::vector<double> d(a.order_ + 1);
    const double cycle[4] = {c, -s, -c, s};
    for (int k = 0; k <= a.order_; ++k) d[k] = cycle[k % 4];
    return a.apply_series(d);
  }

  friend Jet atan(const Jet& a);
  friend Jet substitute(const Jet& f, std::span<const Jet> args);

 private:
  static int clamp_order(const MonomialTable& t, int order) {
    if (order < 0) throw std::invalid_argument("jet order must be >= 0");
    return std::min(order, t.max_order());
  }

  static double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  }

  Jet& combine(const Jet& o, int sgn) {
    if (o.is_scalar()) {
      c_[0] += sgn * o.c_[0];
      return *this;
    }
    if (is_scalar()) {
      Jet promoted = o;
      if (sgn < 0)
        for (double& x : promoted.c_) x = -x;
      promoted.c_[0] += c_[0];
      *this = std::move(promoted);
      return *this;
    }
    if (tab_ != o.tab_) throw std::invalid_argument("jet: table mismatch in sum");
    if (o.order_ < order_) {
      order_ = o.order_;
      c_.resize(tab_->count(order_));
    }
    const int n = static_cast<int>(std::min(c_.size(), o.c_.size()));
    for (int i = 0; i < n; ++i) c_[i] += sgn * o.c_[i];
    return *this;
  }

  const MonomialTable* tab_;
  int order_;
  std::vector<double> c_;
};

inline Jet atan(const Jet& a) {
  if (a.is_scalar()) return Jet(std::atan(a.value()));
  // derivatives of atan from a one-variable helper jet for 1/(1+x^2)
  const int ord = std::max(1, std::min(a.order(), kDefaultJetOrder));
  const MonomialTable& t1 = monomial_table(1, kDefaultJetOrder);
  Jet x = Jet::variable(t1, 0, a.value(), ord);
  Jet den = reciprocal(1.0 + x * x);
  std::vector<double> d(ord + 1);
  d[0] = std::atan(a.value());
  std::array<int, kMaxJetVars> alpha{};
  for (int k = 1; k <= ord; ++k) {
    alpha[0] = k - 1;
    d[k] = den.deriv(std::span<const int>(alpha.data(), 1));
  }
  return a.apply_series(d);
}

/// Substitute jets into a jet: f is treated as expanded at the point whose
/// coordinates are the values of args; the result is the composite expansion
/// in the args' variable space.
inline Jet substitute(const Jet& f, std::span<const Jet> args) {
  if (f.is_scalar()) return f;
  const MonomialTable& t = *f.table();
  if (static_cast<int>(args.size()) != t.nvars())
    throw std::invalid_argument("substitute: argument count mismatch");

  int order = f.order();
  for (const Jet& a : args) order = std::min(order, a.order());

  std::vector<Jet> w(args.size());
  for (std::size_t v = 0; v < args.size(); ++v) {
    w[v] = args[v];
    w[v] -= args[v].value();  // zero constant term
  }

  const int n = t.count(std::min(f.order(), t.max_order()));
  std::vector<Jet> mono(n);
  Jet result(f.c_[0]);
  mono[0] = Jet(1.0);
  for (int i = 1; i < n && i < static_cast<int>(f.c_.size()); ++i) {
    mono[i] = mono[t.parent_idx(i)] * w[t.parent_var(i)];
    if (f.c_[i] != 0.0) result += mono[i] * f.c_[i];
  }
  return result.truncated(order);
}

using JetVec = std::vector<Jet>;

/// Seed coordinate variables at a point: the canonical entry into jet space.
/// All seeds for a given variable count share one table (max order 4) so
/// jets of different truncation orders can mix.
inline JetVec seed_point(std::span<const double> x, int order) {
  if (order > kDefaultJetOrder)
    throw std::invalid_argument("seed_point: order above the supported maximum");
  const MonomialTable& t = monomial_table(static_cast<int>(x.size()), kDefaultJetOrder);
  JetVec out;
  out.reserve(x.size());
  for (std::size_t v = 0; v < x.size(); ++v)
    out.push_back(Jet::variable(t, static_cast<int>(v), x[v], order));
  return out;
}

}  // namespace vsub
