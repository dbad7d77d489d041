#pragma once

// Small dense linear algebra, generic over the scalar (double or Jet).
// Pivoting decisions are always made on the numeric value part, so the same
// elimination/orthonormalization path is taken for a jet matrix as for its
// value matrix; that is what makes frames computed from jet matrices smooth
// fields near a generic point.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vsub/jet.hpp"

namespace vsub {

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

inline double sqrt_t(double x) { return std::sqrt(x); }
inline Jet sqrt_t(const Jet& x) { return sqrt(x); }

inline double reciprocal_t(double x) { return 1.0 / x; }
inline Jet reciprocal_t(const Jet& x) { return reciprocal(x); }

inline bool is_plain(double) { return true; }
inline bool is_plain(const Jet& j) { return j.is_scalar(); }

template <class T>
struct Mat {
  int rows = 0, cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

  T& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  const T& operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

using Matd = Mat<double>;

template <class T>
Mat<T> mat_mul(const Mat<T>& A, const Mat<T>& B) {
  if (A.cols != B.rows) throw std::invalid_argument("mat_mul: shape mismatch");
  Mat<T> C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const T& aik = A(i, k);
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

template <class T>
std::vector<T> mat_vec(const Mat<T>& A, const std::vector<T>& x) {
  if (A.cols != static_cast<int>(x.size())) throw std::invalid_argument("mat_vec: shape mismatch");
  std::vector<T> y(A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) y[i] += A(i, j) * x[j];
  return y;
}

template <class T>
Mat<T> transpose(const Mat<T>& A) {
  Mat<T> B(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) B(j, i) = A(i, j);
  return B;
}

/// Gauss-Jordan inverse with partial pivoting on values.
template <class T>
Mat<T> inverse(Mat<T> A) {
  if (A.rows != A.cols) throw std::invalid_argument("inverse: matrix not square");
  const int n = A.rows;
  Mat<T> I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = I(i, i) + 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(value_of(A(col, col)));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(value_of(A(r, col)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw std::domain_error("inverse: singular matrix");
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(A(piv, c), A(col, c));
        std::swap(I(piv, c), I(col, c));
      }
    T inv_p = reciprocal_t(A(col, col));
    for (int c = 0; c < n; ++c) {
      A(col, c) = A(col, c) * inv_p;
      I(col, c) = I(col, c) * inv_p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      T f = A(r, col);
      if (value_of(f) == 0.0 && is_plain(f)) continue;
      for (int c = 0; c < n; ++c) {
        A(r, c) = A(r, c) - f * A(col, c);
        I(r, c) = I(r, c) - f * I(col, c);
      }
    }
  }
  return I;
}

template <class T>
T determinant(Mat<T> A) {
  if (A.rows != A.cols) throw std::invalid_argument("determinant: matrix not square");
  const int n = A.rows;
  T det{};
  det = det + 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(value_of(A(col, col)));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(value_of(A(r, col)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return T{};
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(A(piv, c), A(col, c));
      det = -det;
    }
    det = det * A(col, col);
    T inv_p = reciprocal_t(A(col, col));
    for (int r = col + 1; r < n; ++r) {
      T f = A(r, col) * inv_p;
      for (int c = col; c < n; ++c) A(r, c) = A(r, c) - f * A(col, c);
    }
  }
  return det;
}

/// Kernel of a (typically wide) matrix via column-pivoted row reduction.
/// The pivot column order is decided on values only, so the returned basis
/// varies smoothly with jet entries near a generic point, and the basis is
/// deterministic for a fixed value matrix.
template <class T>
std::vector<std::vector<T>> kernel_basis(Mat<T> A, double rank_tol = 1e-9) {
  const int m = A.rows, n = A.cols;
  std::vector<int> pivot_col;
  std::vector<bool> used(n, false);
  int row = 0;
  for (; row < m; ++row) {
    // choose the best remaining column for this row block
    int bc = -1;
    int br = -1;
    double best = rank_tol;
    for (int c = 0; c < n; ++c) {
      if (used[c]) continue;
      for (int r = row; r < m; ++r) {
        double v = std::abs(value_of(A(r, c)));
        if (v > best) {
          best = v;
          bc = c;
          br = r;
        }
      }
    }
    if (bc < 0) break;
    used[bc] = true;
    pivot_col.push_back(bc);
    if (br != row)
      for (int c = 0; c < n; ++c) std::swap(A(br, c), A(row, c));
    T inv_p = reciprocal_t(A(row, bc));
    for (int c = 0; c < n; ++c) A(row, c) = A(row, c) * inv_p;
    for (int r = 0; r < m; ++r) {
      if (r == row) continue;
      T f = A(r, bc);
      if (value_of(f) == 0.0 && is_plain(f)) continue;
      for (int c = 0; c < n; ++c) A(r, c) = A(r, c) - f * A(row, c);
    }
  }

  std::vector<std::vector<T>> basis;
  for (int c = 0; c < n; ++c) {
    if (used[c]) continue;
    std::vector<T> v(n);
    v[c] = v[c] + 1.0;
    for (int r = 0; r < static_cast<int>(pivot_col.size()); ++r)
      v[pivot_col[r]] = v[pivot_col[r]] - A(r, c);
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Modified Gram-Schmidt with a caller-supplied inner product.  Vectors with
/// residual norm below drop_tol (after projection) are skipped; the survivors
/// are orthonormal.  Processing order is the input order.
template <class T, class InnerFn>
std::vector<std::vector<T>> gram_schmidt(const std::vector<std::vector<T>>& vecs, InnerFn ip,
                                         double drop_tol = 1e-9) {
  std::vector<std::vector<T>> out;
  for (const auto& v0 : vecs) {
    std::vector<T> v = v0;
    for (const auto& u : out) {
      T c = ip(v, u);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = v[k] - c * u[k];
    }
    T nn = ip(v, v);
    if (value_of(nn) < drop_tol * drop_tol) continue;
    T inv_n = reciprocal_t(sqrt_t(nn));
    for (auto& x : v) x = x * inv_n;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace vsub
