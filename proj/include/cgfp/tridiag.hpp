#pragma once

#include <cstddef>
#include <type_traits>
#include <vector>

#include "cgfp/linalg.hpp"
#include "cgfp/rng.hpp"

namespace cgfp {

// Symmetric tridiagonal T_J: diagonal alpha_1..alpha_J, off-diagonal
// beta_1..beta_{J-1}, plus the trailing coefficient beta_J of the Lanczos
// relation (not part of T_J itself).
template <typename R>
struct Tridiagonal {
  std::vector<R> alpha;
  std::vector<R> beta;
  R beta_last{};

  std::size_t size() const { return alpha.size(); }

  Tridiagonal leading(std::size_t k) const {
    Tridiagonal t;
    t.alpha.assign(alpha.begin(), alpha.begin() + k);
    t.beta.assign(beta.begin(), beta.begin() + (k > 0 ? k - 1 : 0));
    t.beta_last = k < size() ? beta[k - 1] : beta_last;
    return t;
  }
};

template <typename R>
Vec<R> tridiag_apply(const Tridiagonal<R>& T, const Vec<R>& x) {
  const std::size_t n = T.size();
  Vec<R> y = make_vec(n, x[0]);
  for (std::size_t i = 0; i < n; ++i) {
    R acc = make_real<R>(0.0, x[0]);
    if (i > 0) add_product(acc, T.beta[i - 1], x[i - 1]);
    add_product(acc, T.alpha[i], x[i]);
    if (i + 1 < n) add_product(acc, T.beta[i], x[i + 1]);
    y[i] = std::move(acc);
  }
  return y;
}

template <typename R>
Mat<R> to_dense(const Tridiagonal<R>& T) {
  const std::size_t n = T.size();
  Mat<R> A(n, n, make_real<R>(0.0, T.alpha[0]));
  for (std::size_t i = 0; i < n; ++i) {
    A(i, i) = T.alpha[i];
    if (i + 1 < n) {
      A(i, i + 1) = T.beta[i];
      A(i + 1, i) = T.beta[i];
    }
  }
  return A;
}

// Gershgorin enclosure of the spectrum.
template <typename R>
std::pair<R, R> gershgorin(const Tridiagonal<R>& T) {
  using std::abs;
  using std::max;
  using std::min;
  const std::size_t n = T.size();
  R lo = T.alpha[0], hi = T.alpha[0];
  for (std::size_t i = 0; i < n; ++i) {
    R rad = make_real<R>(0.0, T.alpha[0]);
    if (i > 0) rad += abs(T.beta[i - 1]);
    if (i + 1 < n) rad += abs(T.beta[i]);
    lo = min(lo, T.alpha[i] - rad);
    hi = max(hi, T.alpha[i] + rad);
  }
  return {lo, hi};
}

template <typename R>
R tridiag_norm_bound(const Tridiagonal<R>& T) {
  using std::abs;
  using std::max;
  auto [lo, hi] = gershgorin(T);
  return max(abs(lo), abs(hi));
}

// Number of eigenvalues of T strictly below x, by the Sturm sequence of the
// shifted LDL^T pivots.  pivmin guards exact zero pivots.
template <typename R>
std::size_t sturm_count(const Tridiagonal<R>& T, const R& x, const R& pivmin) {
  const std::size_t n = T.size();
  std::size_t cnt = 0;
  R d = T.alpha[0] - x;
  using std::abs;
  if (abs(d) < pivmin) d = -pivmin;
  if (d < 0.0) ++cnt;
  for (std::size_t i = 1; i < n; ++i) {
    R b2 = T.beta[i - 1] * T.beta[i - 1];
    d = T.alpha[i] - x - b2 / d;
    if (abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++cnt;
  }
  return cnt;
}

template <typename R>
R default_pivmin(const Tridiagonal<R>& T) {
  R u = make_real<R>(RealOps<R>::unit_roundoff(T.alpha[0]), T.alpha[0]);
  return u * u * (tridiag_norm_bound(T) + make_real<R>(1.0, T.alpha[0]));
}

namespace detail {

// Bisection for eigenvalue of 0-based index i within [lo, hi]; requires
// count(lo) <= i < count(hi).
template <typename R>
R bisect_index(const Tridiagonal<R>& T, std::size_t i, R lo, R hi, const R& tol, const R& pivmin) {
  R two = make_real<R>(2.0, lo);
  while (hi - lo > tol) {
    R mid = (lo + hi) / two;
    if (mid <= lo || mid >= hi) break;  // interval no longer splittable
    if (sturm_count(T, mid, pivmin) >= i + 1)
      hi = mid;
    else
      lo = mid;
  }
  return (lo + hi) / two;
}

inline Tridiagonal<double> demote(const Tridiagonal<BigFloat>& T) {
  Tridiagonal<double> t;
  t.alpha.reserve(T.size());
  for (const auto& a : T.alpha) t.alpha.push_back(a.to_double());
  t.beta.reserve(T.beta.size());
  for (const auto& b : T.beta) t.beta.push_back(b.to_double());
  t.beta_last = T.beta_last.to_double();
  return t;
}

}  // namespace detail

// All eigenvalues, ascending, each to absolute tolerance tol (default
// 1e3 * u * ||T||).  The multiprecision path seeds each bracket from a double
// pass and falls back to the full Gershgorin interval if the Sturm counts do
// not confirm the bracket.
template <typename R>
Vec<R> tridiag_eigenvalues(const Tridiagonal<R>& T, const R* tol_in = nullptr) {
  const std::size_t n = T.size();
  const R pivmin = default_pivmin(T);
  R scale = tridiag_norm_bound(T) + make_real<R>(1.0, T.alpha[0]);
  R tol = tol_in ? *tol_in
                 : make_real<R>(1e3 * RealOps<R>::unit_roundoff(T.alpha[0]), T.alpha[0]) * scale;
  auto [glo, ghi] = gershgorin(T);
  glo -= tol;
  ghi += tol;

  Vec<R> out;
  out.reserve(n);

  std::vector<double> seeds;
  if constexpr (std::is_same_v<R, BigFloat>) {
    Tridiagonal<double> Td = detail::demote(T);
    Vec<double> sd = tridiag_eigenvalues(Td);
    seeds = sd;
  }

  for (std::size_t i = 0; i < n; ++i) {
    R lo = glo, hi = ghi;
    if (!seeds.empty()) {
      double margin = 1e-10 * (to_double(scale)) + 1e-300;
      R slo = make_real<R>(seeds[i] - margin, scale);
      R shi = make_real<R>(seeds[i] + margin, scale);
      if (sturm_count(T, slo, pivmin) <= i && sturm_count(T, shi, pivmin) >= i + 1) {
        lo = slo;
        hi = shi;
      }
    }
    out.push_back(detail::bisect_index(T, i, lo, hi, tol, pivmin));
  }
  return out;
}

template <typename R>
R tridiag_min_eigenvalue(const Tridiagonal<R>& T, const R* tol_in = nullptr) {
  const R pivmin = default_pivmin(T);
  R scale = tridiag_norm_bound(T) + make_real<R>(1.0, T.alpha[0]);
  R tol = tol_in ? *tol_in
                 : make_real<R>(1e3 * RealOps<R>::unit_roundoff(T.alpha[0]), T.alpha[0]) * scale;
  auto [glo, ghi] = gershgorin(T);
  glo -= tol;
  ghi += tol;
  return detail::bisect_index(T, std::size_t(0), glo, ghi, tol, pivmin);
}

// Solves (T - theta I) x = b by Gaussian elimination with partial pivoting
// (fill-in limited to a second superdiagonal).
template <typename R>
Vec<R> solve_shifted(const Tridiagonal<R>& T, const R& theta, Vec<R> b, const R& pivmin) {
  using std::abs;
  const std::size_t n = T.size();
  Vec<R> u = make_vec(n, theta), v = make_vec(n, theta), w = make_vec(n, theta);
  // current pivot row [p, q, r]
  R p = T.alpha[0] - theta;
  R q = n > 1 ? T.beta[0] : make_real<R>(0.0, theta);
  R r = make_real<R>(0.0, theta);
  R bp = b[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    R p2 = T.beta[i];
    R q2 = T.alpha[i + 1] - theta;
    R r2 = (i + 2 < n) ? T.beta[i + 1] : make_real<R>(0.0, theta);
    R b2 = b[i + 1];
    if (abs(p2) > abs(p)) {
      std::swap(p, p2);
      std::swap(q, q2);
      std::swap(r, r2);
      std::swap(bp, b2);
    }
    if (abs(p) < pivmin) p = (p < 0.0) ? -pivmin : pivmin;
    R m = p2 / p;
    u[i] = p;
    v[i] = q;
    w[i] = r;
    b[i] = bp;
    p = q2 - m * q;
    q = r2 - m * r;
    r = make_real<R>(0.0, theta);
    bp = b2 - m * b[i];
  }
  if (abs(p) < pivmin) p = (p < 0.0) ? -pivmin : pivmin;
  u[n - 1] = p;
  v[n - 1] = q;
  w[n - 1] = r;
  b[n - 1] = bp;

  Vec<R> x = make_vec(n, theta);
  for (std::size_t ii = n; ii-- > 0;) {
    R s = b[ii];
    if (ii + 1 < n) sub_product(s, v[ii], x[ii + 1]);
    if (ii + 2 < n) sub_product(s, w[ii], x[ii + 2]);
    x[ii] = s / u[ii];
  }
  return x;
}

// Eigenvectors by inverse iteration on precomputed eigenvalues (ascending).
// Iterates within clusters are orthogonalized against earlier members so
// tightly clustered Ritz values still produce an orthonormal set.
// Returns the J x J matrix S with eigenvector i in column i.
template <typename R>
Mat<R> tridiag_eigenvectors(const Tridiagonal<R>& T, const Vec<R>& vals) {
  using std::abs;
  const std::size_t n = T.size();
  const R pivmin = default_pivmin(T);
  R scale = tridiag_norm_bound(T) + make_real<R>(1.0, T.alpha[0]);
  double u = RealOps<R>::unit_roundoff(T.alpha[0]);
  R cluster_gap = make_real<R>(1e3 * u, scale) * scale;

  Mat<R> S(n, n, make_real<R>(0.0, T.alpha[0]));
  std::vector<Vec<R>> group;  // vectors of the current cluster
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0 && vals[j] - vals[j - 1] > cluster_gap) group.clear();

    SplitMix64 rng(0x5eedf00dULL + j);
    Vec<R> x = make_vec(n, T.alpha[0]);
    for (auto& xi : x) xi = make_real<R>(rng.next_uniform() - 0.5, T.alpha[0]);
    R nx = nrm2(x);
    R inv = make_real<R>(1.0, nx) / nx;
    scal(x, inv);

    for (int it = 0; it < 5; ++it) {
      x = solve_shifted(T, vals[j], std::move(x), pivmin);
      if (!group.empty()) orthogonalize_against(x, group, 1);
      R norm = nrm2(x);
      if (norm == 0.0) {  // re-seed; essentially never taken
        for (auto& xi : x) xi = make_real<R>(rng.next_uniform() - 0.5, T.alpha[0]);
        norm = nrm2(x);
      }
      R s = make_real<R>(1.0, norm) / norm;
      scal(x, s);
      if (it >= 1) {
        // residual check: ||T x - val x||
        Vec<R> res = tridiag_apply(T, x);
        axmy(res, vals[j], x);
        if (nrm2(res) <= make_real<R>(100.0 * u, scale) * scale) break;
      }
    }
    group.push_back(x);
    for (std::size_t i = 0; i < n; ++i) S(i, j) = x[i];
  }
  return S;
}

// Solves T y = rhs by the symmetric LDL^T factorization (no pivoting).
template <typename R>
Vec<R> ldlt_solve(const Tridiagonal<R>& T, const Vec<R>& rhs) {
  const std::size_t n = T.size();
  Vec<R> d = make_vec(n, T.alpha[0]), l = make_vec(n > 0 ? n - 1 : 0, T.alpha[0]);
  d[0] = T.alpha[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) fail(Errc::Breakdown, "ldlt zero pivot");
    l[i] = T.beta[i] / d[i];
    d[i + 1] = T.alpha[i + 1] - T.beta[i] * l[i];
  }
  if (d[n - 1] == 0.0) fail(Errc::Breakdown, "ldlt zero pivot");
  Vec<R> y = rhs;
  for (std::size_t i = 1; i < n; ++i) sub_product(y[i], l[i - 1], y[i - 1]);
  for (std::size_t i = 0; i < n; ++i) y[i] /= d[i];
  for (std::size_t ii = n - 1; ii-- > 0;) sub_product(y[ii], l[ii], y[ii + 1]);
  return y;
}

}  // namespace cgfp
