#pragma once

// Exact exterior algebra on an m-dimensional oriented inner-product space:
// wedge, exterior/interior multiplication, pointwise inner products, and
// pullback by linear maps.  Coefficients are generic (double for plain
// forms, Jet for differentiable form-valued pipelines).

#include <cstdint>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace vsub {

// A strictly increasing 1-based index tuple (i1 < ... < ip) packed as a bit
// mask: bit (i-1) set means index i is present.
using Mask = std::uint32_t;

inline int mask_degree(Mask m) { return std::popcount(m); }

inline Mask tuple_to_mask(const std::vector<int>& idx, int dim) {
  Mask m = 0;
  int prev = 0;
  for (int i : idx) {
    if (i <= prev || i > dim)
      throw std::invalid_argument("index tuple must be strictly increasing in 1..dim");
    m |= Mask{1} << (i - 1);
    prev = i;
  }
  return m;
}

inline std::vector<int> mask_to_tuple(Mask m) {
  std::vector<int> t;
  for (int i = 0; m != 0; ++i, m >>= 1)
    if (m & 1u) t.push_back(i + 1);
  return t;
}

// Parity sign of sorting the concatenation (A, B) of two disjoint increasing
// tuples: (-1)^{#{(x in A, y in B) : y < x}}.
inline int merge_sign(Mask a, Mask b) {
  int inv = 0;
  Mask rest = a;
  while (rest != 0) {
    int x = std::countr_zero(rest);
    inv += std::popcount(b & ((Mask{1} << x) - 1));
    rest &= rest - 1;
  }
  return (inv & 1) ? -1 : 1;
}

template <class T>
struct CovectorT {
  std::vector<T> comp;  // length = dimension

  int dim() const { return static_cast<int>(comp.size()); }
};

using Covector = CovectorT<double>;

namespace detail {
inline bool exact_zero(double c) { return c == 0.0; }
template <class T>
bool exact_zero(const T&) { return false; }  // keep generic coefficients
}  // namespace detail

/// Alternating p-tensor at a point: coefficients over strictly increasing
/// index tuples.  Canonical form: absent keys are zero, stored exact zeros
/// are pruned (for double coefficients), so equality of representations is
/// equality of forms.
template <class T>
class BasicForm {
 public:
  BasicForm(int degree, int dim) : degree_(degree), dim_(dim) {
    if (degree < 0 || dim < 0 || degree > dim)
      throw std::invalid_argument("form degree must satisfy 0 <= p <= dim");
  }

  static BasicForm scalar(int dim, T v) {
    BasicForm f(0, dim);
    f.add(0, std::move(v));
    return f;
  }

  static BasicForm basis(int dim, const std::vector<int>& tuple, T coeff) {
    BasicForm f(static_cast<int>(tuple.size()), dim);
    f.add(tuple_to_mask(tuple, dim), std::move(coeff));
    return f;
  }

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  const std::map<Mask, T>& coeffs() const { return c_; }

  bool has(Mask m) const { return c_.count(m) != 0; }

  T coeff(Mask m) const {
    auto it = c_.find(m);
    if (it != c_.end()) return it->second;
    return T{};
  }

  T coeff(const std::vector<int>& tuple) const { return coeff(tuple_to_mask(tuple, dim_)); }

  void add(Mask m, T v) {
    if (mask_degree(m) != degree_)
      throw std::invalid_argument("coefficient tuple has wrong length for form degree");
    auto it = c_.find(m);
    if (it == c_.end()) {
      if (!detail::exact_zero(v)) c_.emplace(m, std::move(v));
    } else {
      it->second = it->second + v;
      if (detail::exact_zero(it->second)) c_.erase(it);
    }
  }

  void set(Mask m, T v) {
    if (mask_degree(m) != degree_)
      throw std::invalid_argument("coefficient tuple has wrong length for form degree");
    if (detail::exact_zero(v))
      c_.erase(m);
    else
      c_.insert_or_assign(m, std::move(v));
  }

  BasicForm& operator+=(const BasicForm& o) {
    require_same_shape(o);
    for (const auto& [m, v] : o.c_) add(m, v);
    return *this;
  }

  BasicForm& operator-=(const BasicForm& o) {
    require_same_shape(o);
    for (const auto& [m, v] : o.c_) add(m, -v);
    return *this;
  }

  BasicForm& operator*=(const T& s) {
    if (detail::exact_zero(s)) {
      c_.clear();
      return *this;
    }
    for (auto& [m, v] : c_) v = v * s;
    return *this;
  }

  friend BasicForm operator+(BasicForm a, const BasicForm& b) { return a += b; }
  friend BasicForm operator-(BasicForm a, const BasicForm& b) { return a -= b; }
  friend BasicForm operator*(BasicForm a, const T& s) { return a *= s; }
  friend BasicForm operator*(const T& s, BasicForm a) { return a *= s; }

 private:
  void require_same_shape(const BasicForm& o) const {
    if (o.degree_ != degree_ || o.dim_ != dim_)
      throw std::invalid_argument("form degree/dimension mismatch");
  }

  int degree_;
  int dim_;
  std::map<Mask, T> c_;
};

using MultiIndexForm = BasicForm<double>;

template <class T>
BasicForm<T> wedge(const BasicForm<T>& a, const BasicForm<T>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dimension mismatch");
  if (a.degree() + b.degree() > a.dim())
    throw std::invalid_argument("wedge: degree overflow");
  BasicForm<T> out(a.degree() + b.degree(), a.dim());
  for (const auto& [ma, va] : a.coeffs())
    for (const auto& [mb, vb] : b.coeffs()) {
      if (ma & mb) continue;  // repeated covector
      T term = va * vb;
      if (merge_sign(ma, mb) < 0) term = -term;
      out.add(ma | mb, std::move(term));
    }
  return out;
}

/// ext(xi) alpha = xi ^ alpha.
template <class T>
BasicForm<T> ext_mul(const CovectorT<T>& xi, const BasicForm<T>& alpha) {
  if (xi.dim() != alpha.dim()) throw std::invalid_argument("ext_mul: dimension mismatch");
  BasicForm<T> one(1, xi.dim());
  for (int k = 0; k < xi.dim(); ++k)
    one.add(Mask{1} << k, xi.comp[k]);
  return wedge(one, alpha);
}

/// Interior multiplication, the adjoint of ext_mul in the inner product that
/// makes the increasing-tuple basis orthonormal.  On degree 0 returns 0.
template <class T>
BasicForm<T> int_mul(const CovectorT<T>& xi, const BasicForm<T>& alpha) {
  if (xi.dim() != alpha.dim()) throw std::invalid_argument("int_mul: dimension mismatch");
  int p = alpha.degree();
  if (p == 0) return BasicForm<T>(0, alpha.dim());
  BasicForm<T> out(p - 1, alpha.dim());
  for (const auto& [m, v] : alpha.coeffs()) {
    Mask rest = m;
    while (rest != 0) {
      int bit = std::countr_zero(rest);
      rest &= rest - 1;
      int pos = std::popcount(m & ((Mask{1} << bit) - 1));
      T term = xi.comp[bit] * v;
      if (pos & 1) term = -term;
      out.add(m ^ (Mask{1} << bit), std::move(term));
    }
  }
  return out;
}

template <class T>
T inner(const BasicForm<T>& a, const BasicForm<T>& b) {
  if (a.degree() != b.degree() || a.dim() != b.dim())
    throw std::invalid_argument("inner: degree/dimension mismatch");
  T s{};
  for (const auto& [m, v] : a.coeffs())
    if (b.has(m)) s = s + v * b.coeff(m);
  return s;
}

inline double norm(const MultiIndexForm& a) { return std::sqrt(inner(a, a)); }

/// Pullback along the linear map sending the c-th target basis vector to the
/// source vector with components A[c][0..m-1]; A has one row per target
/// dimension and one column per source dimension (= dim of alpha).
/// Multiplicative over wedge by construction.
template <class T>
BasicForm<T> pullback_linear(const std::vector<std::vector<T>>& A, const BasicForm<T>& alpha) {
  const int m = alpha.dim();
  const int mp = static_cast<int>(A.size());
  for (const auto& row : A)
    if (static_cast<int>(row.size()) != m)
      throw std::invalid_argument("pullback_linear: column count must equal form dimension");
  if (alpha.degree() > mp)
    throw std::invalid_argument("pullback_linear: form degree exceeds target dimension");

  // Pullbacks of the source basis covectors, as target 1-forms.
  std::vector<BasicForm<T>> pulled;
  pulled.reserve(m);
  for (int k = 0; k < m; ++k) {
    BasicForm<T> one(1, mp);
    for (int c = 0; c < mp; ++c) one.add(Mask{1} << c, A[c][k]);
    pulled.push_back(std::move(one));
  }

  BasicForm<T> out(alpha.degree(), mp);
  for (const auto& [mask, v] : alpha.coeffs()) {
    BasicForm<T> term = BasicForm<T>::scalar(mp, v);
    Mask rest = mask;
    while (rest != 0) {
      int bit = std::countr_zero(rest);
      rest &= rest - 1;
      term = wedge(term, pulled[bit]);
    }
    out += term;
  }
  return out;
}

}  // namespace vsub
