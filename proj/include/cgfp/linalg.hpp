#pragma once

#include <cstddef>
#include <vector>

#include "cgfp/bigfloat.hpp"
#include "cgfp/errors.hpp"

namespace cgfp {

template <typename R>
using Vec = std::vector<R>;

// Dense row-major matrix.  All reductions below run as plain sequential loops
// in a fixed order; solver runs are reproducible bit-for-bit per build.
template <typename R>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, const R& fill)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  R& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const R& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  std::vector<R>& data() { return a_; }
  const std::vector<R>& data() const { return a_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<R> a_;
};

template <typename R>
Vec<R> make_vec(std::size_t n, const R& like) {
  return Vec<R>(n, make_real<R>(0.0, like));
}

template <typename R>
R dot(const Vec<R>& a, const Vec<R>& b) {
  R acc = make_real<R>(0.0, a.empty() ? R{} : a[0]);
  for (std::size_t i = 0; i < a.size(); ++i) add_product(acc, a[i], b[i]);
  return acc;
}

template <typename R>
R nrm2(const Vec<R>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

// y += c*x
template <typename R>
void axpy(Vec<R>& y, const R& c, const Vec<R>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) add_product(y[i], c, x[i]);
}

// y -= c*x
template <typename R>
void axmy(Vec<R>& y, const R& c, const Vec<R>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) sub_product(y[i], c, x[i]);
}

template <typename R>
void scal(Vec<R>& y, const R& c) {
  for (auto& v : y) v *= c;
}

template <typename R>
Vec<R> vsub(const Vec<R>& a, const Vec<R>& b) {
  Vec<R> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

template <typename R>
Vec<R> matvec(const Mat<R>& A, const Vec<R>& x) {
  if (A.cols() != x.size()) fail(Errc::DimensionMismatch, "matvec shape");
  Vec<R> y = make_vec(A.rows(), x.empty() ? R{} : x[0]);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    R acc = make_real<R>(0.0, y[i]);
    for (std::size_t j = 0; j < A.cols(); ++j) add_product(acc, A(i, j), x[j]);
    y[i] = std::move(acc);
  }
  return y;
}

// <x, A y> without forming intermediates beyond one row accumulation.
template <typename R>
R quad_form(const Mat<R>& A, const Vec<R>& x, const Vec<R>& y) {
  R acc = make_real<R>(0.0, x.empty() ? R{} : x[0]);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    R row = make_real<R>(0.0, acc);
    for (std::size_t j = 0; j < A.cols(); ++j) add_product(row, A(i, j), y[j]);
    add_product(acc, x[i], row);
  }
  return acc;
}

inline Vec<BigFloat> promote(const Vec<double>& x, mpfr_prec_t bits) {
  Vec<BigFloat> r;
  r.reserve(x.size());
  for (double v : x) r.emplace_back(v, bits);
  return r;
}

inline Mat<BigFloat> promote(const Mat<double>& A, mpfr_prec_t bits) {
  Mat<BigFloat> r(A.rows(), A.cols(), BigFloat(0.0, bits));
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) r(i, j) = BigFloat(A(i, j), bits);
  return r;
}

inline Vec<double> demote(const Vec<BigFloat>& x) {
  Vec<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i].to_double();
  return r;
}

// Cholesky factorization A = L L^T, lower triangle returned.
template <typename R>
Mat<R> cholesky(const Mat<R>& A) {
  using std::sqrt;
  const std::size_t n = A.rows();
  if (A.cols() != n) fail(Errc::DimensionMismatch, "cholesky needs square input");
  Mat<R> L = Mat<R>(n, n, make_real<R>(0.0, A(0, 0)));
  for (std::size_t j = 0; j < n; ++j) {
    R d = A(j, j);
    for (std::size_t k = 0; k < j; ++k) sub_product(d, L(j, k), L(j, k));
    if (!(d > 0.0)) fail(Errc::NotPositiveDefinite, "cholesky pivot <= 0");
    L(j, j) = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      R s = A(i, j);
      for (std::size_t k = 0; k < j; ++k) sub_product(s, L(i, k), L(j, k));
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

template <typename R>
Vec<R> cholesky_solve(const Mat<R>& L, const Vec<R>& b) {
  const std::size_t n = L.rows();
  Vec<R> y = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) sub_product(y[i], L(i, k), y[k]);
    y[i] /= L(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) sub_product(y[ii], L(k, ii), y[k]);
    y[ii] /= L(ii, ii);
  }
  return y;
}

// Subtracts from v its components along each (unit-norm) column in basis.
// Two passes of modified Gram-Schmidt by default.
template <typename R>
void orthogonalize_against(Vec<R>& v, const std::vector<Vec<R>>& basis, int passes = 2) {
  for (int p = 0; p < passes; ++p)
    for (const auto& q : basis) {
      R c = dot(q, v);
      axmy(v, c, q);
    }
}

// In-place Gaussian elimination with partial pivoting; returns the solution
// of A x = b.  A and b are consumed.
template <typename R>
Vec<R> gauss_solve(Mat<R>& A, Vec<R>& b) {
  using std::abs;
  const std::size_t n = A.rows();
  if (A.cols() != n || b.size() != n) fail(Errc::DimensionMismatch, "gauss_solve shape");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (abs(A(i, col)) > abs(A(piv, col))) piv = i;
    if (A(piv, col) == 0.0) fail(Errc::Breakdown, "singular linear system");
    if (piv != col) {
      for (std::size_t j = col; j < n; ++j) std::swap(A(col, j), A(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      R m = A(i, col) / A(col, col);
      if (m == 0.0) continue;
      for (std::size_t j = col + 1; j < n; ++j) sub_product(A(i, j), m, A(col, j));
      sub_product(b[i], m, b[col]);
    }
  }
  Vec<R> x = make_vec(n, b[0]);
  for (std::size_t ii = n; ii-- > 0;) {
    R s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) sub_product(s, A(ii, j), x[j]);
    x[ii] = s / A(ii, ii);
  }
  return x;
}

}  // namespace cgfp
