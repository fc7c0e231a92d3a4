#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cgfp/cg.hpp"
#include "cgfp/tridiag.hpp"

namespace cgfp {

// T_J from the CG coefficients:
//   alpha_1 = 1/a_0,  alpha_j = 1/a_{j-1} + b_{j-1}/a_{j-2}  (j >= 2)
//   beta_j  = ||r_j|| / (a_{j-1} ||r_{j-1}||),  beta_last = beta_J.
template <typename R>
Tridiagonal<R> build_tridiagonal(const CGTrace<R>& trace, std::size_t J = 0) {
  const std::size_t K = trace.iterations();
  if (K < 1) fail(Errc::InvalidInput, "trace has no completed iteration");
  if (J == 0) J = K;
  if (J > K) fail(Errc::DimensionMismatch, "J exceeds trace length");
  for (std::size_t k = 0; k <= J; ++k)
    if (!(trace.rnorm[k] > 0.0)) fail(Errc::ZeroCoefficient, "zero residual norm in range");
  for (std::size_t k = 0; k < J; ++k)
    if (trace.coeff_a[k] == 0.0) fail(Errc::ZeroCoefficient, "zero coefficient a in range");

  Tridiagonal<R> T;
  const R one = make_real<R>(1.0, trace.coeff_a[0]);
  T.alpha.reserve(J);
  T.alpha.push_back(one / trace.coeff_a[0]);
  for (std::size_t j = 2; j <= J; ++j)
    T.alpha.push_back(one / trace.coeff_a[j - 1] + trace.coeff_b[j - 2] / trace.coeff_a[j - 2]);
  T.beta.reserve(J > 0 ? J - 1 : 0);
  for (std::size_t j = 1; j < J; ++j)
    T.beta.push_back(trace.rnorm[j] / (trace.coeff_a[j - 1] * trace.rnorm[j - 1]));
  T.beta_last = trace.rnorm[J] / (trace.coeff_a[J - 1] * trace.rnorm[J - 1]);
  return T;
}

struct LanczosDiagnostics {
  std::vector<double> f_norms;  // ||f_k||/||A||, k = 1..J
  double eps1 = 0.0;            // max_k ||f_k||/||A||
  double eps2 = 0.0;            // max_k |<beta_k q_{k+1}, q_k>|/||A||
  double eps3 = 0.0;            // max_k ||x_k - (x_0 + Q_k T_k^{-1} beta xi_1)|| / ||A^{-1} b||
  std::pair<double, double> qnorm_range{1.0, 1.0};
  double fro_columns_rel = 0.0;  // sqrt(sum ||f_k||^2)/||A||
  double fro_matrix_rel = 0.0;   // ||A Q - Q T - beta_J q_{J+1} xi_J^T||_F / ||A||
};

namespace detail {

inline BigFloat to_meas(double v, mpfr_prec_t bits) { return BigFloat(v, bits); }
inline BigFloat to_meas(const BigFloat& v, mpfr_prec_t bits) {
  BigFloat r = v;
  r.round_to(bits);
  return r;
}

template <typename S>
Vec<BigFloat> to_meas_vec(const Vec<S>& v, mpfr_prec_t bits) {
  Vec<BigFloat> r;
  r.reserve(v.size());
  for (const auto& x : v) r.push_back(to_meas(x, bits));
  return r;
}

template <typename S>
Mat<BigFloat> to_meas_mat(const Mat<S>& A, mpfr_prec_t bits) {
  Mat<BigFloat> r(A.rows(), A.cols(), BigFloat(0.0, bits));
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) r(i, j) = to_meas(A(i, j), bits);
  return r;
}

// Measured Lanczos-relation defects, evaluated at `bits` precision from the
// stored trace vectors.  q_{k+1} = (-1)^k r_k / ||r_k|| with the trace's own
// recorded norms as normalizers, so the q's carry the working-precision
// normalization error the analysis allows for.
template <typename S>
LanczosDiagnostics lanczos_core(const Mat<BigFloat>& Am, const BigFloat& anorm,
                                const CGTrace<S>& trace, const Tridiagonal<S>& T,
                                const Vec<BigFloat>& x_star, mpfr_prec_t bits) {
  const std::size_t J = T.size();
  const std::size_t n = Am.rows();
  if (trace.updated_residuals.size() < J + 1 || trace.iterates.size() < J + 1)
    fail(Errc::MissingVectors, "trace vectors not recorded");
  if (trace.updated_residuals[0].size() != n) fail(Errc::DimensionMismatch, "A vs trace dimension");

  const BigFloat zero(0.0, bits);
  const BigFloat one(1.0, bits);

  std::vector<Vec<BigFloat>> q(J + 2);
  std::vector<double> qnorms;
  for (std::size_t k = 0; k <= J; ++k) {
    Vec<BigFloat> rk = to_meas_vec(trace.updated_residuals[k], bits);
    BigFloat rn = to_meas(trace.rnorm[k], bits);
    BigFloat scale = ((k % 2) ? -one : one) / rn;
    scal(rk, scale);
    q[k + 1] = std::move(rk);
    qnorms.push_back(nrm2(q[k + 1]).to_double());
  }

  std::vector<BigFloat> alpha, beta;  // beta[j] = beta_{j+1}, includes beta_J
  for (std::size_t j = 0; j < J; ++j) alpha.push_back(to_meas(T.alpha[j], bits));
  for (std::size_t j = 0; j + 1 < J; ++j) beta.push_back(to_meas(T.beta[j], bits));
  beta.push_back(to_meas(T.beta_last, bits));

  Tridiagonal<BigFloat> Tm;
  Tm.alpha = alpha;
  Tm.beta.assign(beta.begin(), beta.end() - 1);
  Tm.beta_last = beta.back();

  LanczosDiagnostics d;
  d.qnorm_range = {*std::min_element(qnorms.begin(), qnorms.end()),
                   *std::max_element(qnorms.begin(), qnorms.end())};

  BigFloat fro2(0.0, bits);
  for (std::size_t k = 1; k <= J; ++k) {
    Vec<BigFloat> f = matvec(Am, q[k]);
    axmy(f, beta[k - 1], q[k + 1]);  // beta_k q_{k+1}
    axmy(f, alpha[k - 1], q[k]);     // alpha_k q_k
    if (k >= 2) axmy(f, beta[k - 2], q[k - 1]);
    BigFloat fn = nrm2(f);
    d.f_norms.push_back((fn / anorm).to_double());
    add_product(fro2, fn, fn);
    double e2 = abs(beta[k - 1] * dot(q[k + 1], q[k]) / anorm).to_double();
    d.eps2 = std::max(d.eps2, e2);
  }
  d.eps1 = *std::max_element(d.f_norms.begin(), d.f_norms.end());
  d.fro_columns_rel = (sqrt(fro2) / anorm).to_double();

  // Matrix-level residual by an independent route: dense Q*T column sums
  // instead of the three-term sparsity.
  {
    Mat<BigFloat> Td = to_dense(Tm);
    BigFloat fro2m(0.0, bits);
    for (std::size_t k = 1; k <= J; ++k) {
      Vec<BigFloat> col = matvec(Am, q[k]);
      for (std::size_t j = 1; j <= J; ++j) axmy(col, Td(j - 1, k - 1), q[j]);
      if (k == J) axmy(col, beta[J - 1], q[J + 1]);  // beta_J q_{J+1} xi_J^T
      BigFloat cn = nrm2(col);
      add_product(fro2m, cn, cn);
    }
    d.fro_matrix_rel = (sqrt(fro2m) / anorm).to_double();
  }

  // eps3: accuracy of x_k against x_0 + Q_k T_k^{-1} beta xi_1.
  BigFloat xstar_norm = nrm2(x_star);
  const BigFloat beta0 = to_meas(trace.rnorm[0], bits);
  Vec<BigFloat> x0 = to_meas_vec(trace.iterates[0], bits);
  for (std::size_t k = 1; k <= J; ++k) {
    Tridiagonal<BigFloat> Tk = Tm.leading(k);
    Vec<BigFloat> rhs(k, zero);
    rhs[0] = beta0;
    Vec<BigFloat> y = ldlt_solve(Tk, rhs);
    Vec<BigFloat> xhat = x0;
    for (std::size_t j = 0; j < k; ++j) axpy(xhat, y[j], q[j + 1]);
    Vec<BigFloat> xk = to_meas_vec(trace.iterates[k], bits);
    Vec<BigFloat> diff = vsub(xk, xhat);
    double e3 = (nrm2(diff) / xstar_norm).to_double();
    d.eps3 = std::max(d.eps3, e3);
  }
  return d;
}

}  // namespace detail

// Working-precision trace measured in doubled precision (default 32 decimal
// digits); A^{-1} b comes from the cached eigendecomposition.
inline LanczosDiagnostics lanczos_residual(const SpdMatrix& A, const CGTrace<double>& trace,
                                           const Tridiagonal<double>& T, int meas_digits = 32) {
  mpfr_prec_t bits = PrecisionContext::bits_for(meas_digits);
  Mat<BigFloat> Am = detail::to_meas_mat(A.mat(), bits);
  BigFloat anorm(A.norm2(), bits);
  Vec<double> b(A.dim(), 0.0);
  // reconstruct b from the trace: r_0 = b - A x_0
  {
    Vec<double> Ax0 = matvec(A.mat(), trace.iterates.at(0));
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = trace.updated_residuals.at(0)[i] + Ax0[i];
  }
  Vec<BigFloat> x_star = detail::to_meas_vec(A.apply_inverse(b), bits);
  return detail::lanczos_core(Am, anorm, trace, T, x_star, bits);
}

inline LanczosDiagnostics lanczos_residual(const Problem& problem, const CGTrace<double>& trace,
                                           const Tridiagonal<double>& T, int meas_digits = 32) {
  mpfr_prec_t bits = PrecisionContext::bits_for(meas_digits);
  Mat<BigFloat> Am = detail::to_meas_mat(problem.A.mat(), bits);
  BigFloat anorm(problem.A.norm2(), bits);
  Vec<BigFloat> x_star = detail::to_meas_vec(problem.A.apply_inverse(problem.b), bits);
  return detail::lanczos_core(Am, anorm, trace, T, x_star, bits);
}

// High-precision trace measured at meas_digits; A^{-1} b solved by Cholesky
// at the measurement precision.  Caller supplies ||A||_2.
inline LanczosDiagnostics lanczos_residual_hp(const Mat<BigFloat>& A, const Vec<BigFloat>& b,
                                              double anorm_in, const CGTrace<BigFloat>& trace,
                                              const Tridiagonal<BigFloat>& T, int meas_digits) {
  mpfr_prec_t bits = PrecisionContext::bits_for(meas_digits);
  Mat<BigFloat> Am = detail::to_meas_mat(A, bits);
  Vec<BigFloat> bm = detail::to_meas_vec(b, bits);
  Mat<BigFloat> L = cholesky(Am);
  Vec<BigFloat> x_star = cholesky_solve(L, bm);
  BigFloat anorm(anorm_in, bits);
  return detail::lanczos_core(Am, anorm, trace, T, x_star, bits);
}

struct AuxiliaryDeviation {
  std::vector<double> s_dev;  // ||s_k - A p_k|| / (||A|| ||p_k||)
  std::vector<double> w_dev;  // ||w_k - A r_k|| / (||A|| ||r_k||)
  std::vector<double> u_dev;  // ||u_k - A s_k|| / (||A|| ||s_k||)
};

// Measured drift of the recurrence-maintained auxiliary vectors from their
// definitions, in doubled precision.  HSCG has no recurrence auxiliaries and
// returns empty arrays.
template <typename S>
AuxiliaryDeviation auxiliary_deviation(const Mat<S>& A, double anorm_in, const CGTrace<S>& trace,
                                       int meas_digits = 32) {
  AuxiliaryDeviation out;
  if (trace.variant == Variant::HSCG) return out;
  if (trace.aux_s.empty() || trace.updated_residuals.empty())
    fail(Errc::MissingVectors, "auxiliary vectors not recorded");
  mpfr_prec_t bits = PrecisionContext::bits_for(meas_digits);
  Mat<BigFloat> Am = detail::to_meas_mat(A, bits);
  BigFloat anorm(anorm_in, bits);

  auto dev = [&](const Vec<S>& lhs, const Vec<S>& arg) {
    Vec<BigFloat> l = detail::to_meas_vec(lhs, bits);
    Vec<BigFloat> g = detail::to_meas_vec(arg, bits);
    Vec<BigFloat> Ag = matvec(Am, g);
    Vec<BigFloat> diff = vsub(l, Ag);
    BigFloat den = anorm * nrm2(g);
    if (den == 0.0) return 0.0;
    return (nrm2(diff) / den).to_double();
  };

  const std::size_t m = trace.aux_s.size();
  for (std::size_t k = 0; k < m; ++k) out.s_dev.push_back(dev(trace.aux_s[k], trace.aux_p[k]));
  if (trace.variant == Variant::GVCG) {
    for (std::size_t k = 0; k < trace.aux_w.size(); ++k)
      out.w_dev.push_back(dev(trace.aux_w[k], trace.updated_residuals[k]));
    for (std::size_t k = 0; k < trace.aux_u.size(); ++k)
      out.u_dev.push_back(dev(trace.aux_u[k], trace.aux_s[k]));
  }
  return out;
}

template <typename S>
AuxiliaryDeviation auxiliary_deviation(const SpdMatrix& A, const CGTrace<S>& trace,
                                       int meas_digits = 32) {
  return auxiliary_deviation(A.mat(), A.norm2(), trace, meas_digits);
}

// Histogram bins in the paper's 1-based numbering: bin 1 below the spectrum,
// bin 2j the closed interval [lambda_j - w, lambda_j + w], bin 2j+1 the open
// gap up to the next eigenvalue, bin 2n+1 above.  counts[i] holds bin i+1.
struct HistogramReport {
  std::vector<double> bin_edges;  // the 2n finite edges lambda_j -/+ w
  std::vector<std::size_t> counts;
  std::vector<std::pair<double, double>> offenders;  // (value, distance to spectrum)
};

inline double distance_to_set(double v, const std::vector<double>& sorted) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  double dist = std::numeric_limits<double>::infinity();
  if (it != sorted.end()) dist = std::min(dist, std::abs(*it - v));
  if (it != sorted.begin()) dist = std::min(dist, std::abs(*(it - 1) - v));
  return dist;
}

inline HistogramReport ritz_histogram_values(const std::vector<double>& values,
                                             const std::vector<double>& spectrum,
                                             double half_width) {
  const std::size_t n = spectrum.size();
  if (n == 0) fail(Errc::InvalidInput, "empty spectrum");
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!(spectrum[j] < spectrum[j + 1])) fail(Errc::InvalidInput, "spectrum must be ascending");
    if (!(spectrum[j] + half_width < spectrum[j + 1] - half_width))
      fail(Errc::BinsOverlap, "even bins overlap at index " + std::to_string(j + 1));
  }
  HistogramReport h;
  h.bin_edges.reserve(2 * n);
  for (double lam : spectrum) {
    h.bin_edges.push_back(lam - half_width);
    h.bin_edges.push_back(lam + half_width);
  }
  h.counts.assign(2 * n + 1, 0);
  for (double v : values) {
    // nearest spectrum point decides even-bin membership
    auto it = std::lower_bound(spectrum.begin(), spectrum.end(), v);
    std::size_t jn = (it == spectrum.end()) ? n - 1 : std::size_t(it - spectrum.begin());
    if (it != spectrum.begin() &&
        (it == spectrum.end() || std::abs(*(it - 1) - v) <= std::abs(*it - v)))
      jn = std::size_t(it - spectrum.begin()) - 1;
    std::size_t bin;
    if (std::abs(v - spectrum[jn]) <= half_width) {
      bin = 2 * jn + 1;  // even paper bin 2(jn+1)
    } else {
      if (v < spectrum[0] - half_width)
        bin = 0;
      else if (v > spectrum[n - 1] + half_width)
        bin = 2 * n;
      else
        bin = (v < spectrum[jn]) ? 2 * jn : 2 * jn + 2;
      h.offenders.emplace_back(v, distance_to_set(v, spectrum));
    }
    ++h.counts[bin];
  }
  return h;
}

inline HistogramReport ritz_histogram(const Tridiagonal<double>& T,
                                      const std::vector<double>& spectrum, double half_width) {
  return ritz_histogram_values(tridiag_eigenvalues(T), spectrum, half_width);
}

// Closed-interval distance from [a,b] to the point set S: zero when a point
// lies inside, else the nearest endpoint distance.
inline double interval_distance(double a, double b, const std::vector<double>& sorted) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), a);
  if (it != sorted.end() && *it <= b) return 0.0;
  return std::min(distance_to_set(a, sorted), distance_to_set(b, sorted));
}

// By Cauchy interlacing every symmetric extension of T has an eigenvalue in
// each closed bracket of consecutive eigenvalues of T; the largest
// bracket-to-spectrum distance is therefore a floor on the worst
// eigenvalue-to-spectrum distance over all extensions.
inline double extension_floor_values(const std::vector<double>& theta,
                                     const std::vector<double>& spectrum) {
  if (theta.size() < 2) fail(Errc::InvalidInput, "need at least two eigenvalues");
  double floor_dist = 0.0;
  for (std::size_t i = 0; i + 1 < theta.size(); ++i)
    floor_dist = std::max(floor_dist, interval_distance(theta[i], theta[i + 1], spectrum));
  return floor_dist;
}

inline double extension_floor(const Tridiagonal<double>& T, const std::vector<double>& spectrum) {
  // bracket endpoints at the bisection limit: the floor competes with
  // eigenvalue distances at the 1e-15 scale
  double tol = 4.0 * 0x1p-53 * (to_double(tridiag_norm_bound(T)) + 1.0);
  return extension_floor_values(tridiag_eigenvalues(T, &tol), spectrum);
}

struct Definiteness {
  double min_eig = 0.0;
  bool positive_definite = false;
};

inline Definiteness definiteness(const Tridiagonal<double>& T) {
  Definiteness d;
  d.min_eig = tridiag_min_eigenvalue(T);
  d.positive_definite = d.min_eig > 0.0;
  return d;
}

}  // namespace cgfp
