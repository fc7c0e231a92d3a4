#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cgfp/cg.hpp"
#include "cgfp/diagnostics.hpp"
#include "cgfp/matio.hpp"
#include "cgfp/tridiag.hpp"

namespace cgfp {

struct ExactCgOptions {
  double stop_tol = 0.0;        // stop once relative A-norm error <= this (0 = run to max_iter)
  bool record_vectors = true;
  bool record_updated_err = false;  // <r, A^{-1} r>^{1/2} per step (extra backsolve)
};

struct ExactCgResult {
  CGTrace<BigFloat> trace;
  std::vector<BigFloat> err_anorm_rel;  // k = 0..K, A-norm error over initial A-norm error
  Vec<BigFloat> x_star;
};

// "Exact" CG: the HSCG recurrences in context precision with every new
// residual reorthogonalized against all previous residual directions by two
// passes of modified Gram-Schmidt before any norm or inner product of it is
// formed.  The reference solution A^{-1} b comes from a context-precision
// Cholesky factorization.
inline ExactCgResult exact_cg(const Mat<BigFloat>& A, const Vec<BigFloat>& b,
                              const Vec<BigFloat>& x0, std::size_t max_iter,
                              const PrecisionContext& ctx, const ExactCgOptions& opts = {}) {
  if (ctx.digits() < 32) fail(Errc::PrecisionTooLow, "exact_cg needs >= 32 digits");
  const std::size_t n = b.size();
  if (A.rows() != n || A.cols() != n || x0.size() != n) fail(Errc::DimensionMismatch, "exact_cg shapes");

  ExactCgResult out;
  CGTrace<BigFloat>& tr = out.trace;
  tr.variant = Variant::HSCG;

  Mat<BigFloat> L = cholesky(A);
  out.x_star = cholesky_solve(L, b);

  const BigFloat zero = ctx.make(0.0);
  const BigFloat floor_tol = ctx.pow10(-(ctx.digits() - 5));

  auto anorm_err = [&](const Vec<BigFloat>& x) {
    Vec<BigFloat> e = vsub(out.x_star, x);
    BigFloat q = quad_form(A, e, e);
    if (q < 0.0) q = zero;
    return sqrt(q);
  };
  auto updated_err = [&](const Vec<BigFloat>& r) {
    Vec<BigFloat> z = cholesky_solve(L, r);
    BigFloat q = dot(r, z);
    if (q < 0.0) q = zero;
    return sqrt(q);
  };

  Vec<BigFloat> x = x0;
  Vec<BigFloat> r = b;
  {
    Vec<BigFloat> Ax = matvec(A, x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= Ax[i];
  }
  BigFloat nu = dot(r, r);
  if (nu == 0.0) fail(Errc::InvalidInput, "zero initial residual");
  const BigFloat rnorm0 = sqrt(nu);

  BigFloat err0 = anorm_err(x);
  if (err0 == 0.0) fail(Errc::InvalidInput, "x0 already solves the system");

  auto record = [&](const Vec<BigFloat>& xk, const Vec<BigFloat>& rk, const BigFloat& rn) {
    tr.rnorm.push_back(rn);
    BigFloat e = anorm_err(xk);
    tr.anorm_err.push_back(e);
    out.err_anorm_rel.push_back(e / err0);
    if (opts.record_updated_err) tr.updated_anorm_err.push_back(updated_err(rk));
    if (opts.record_vectors) {
      tr.iterates.push_back(xk);
      tr.updated_residuals.push_back(rk);
    }
  };

  std::vector<Vec<BigFloat>> qs;  // unit residual directions for reorthogonalization
  {
    Vec<BigFloat> q0 = r;
    BigFloat inv = ctx.make(1.0) / rnorm0;
    scal(q0, inv);
    qs.push_back(std::move(q0));
  }

  Vec<BigFloat> p = r;
  Vec<BigFloat> s = matvec(A, p);
  BigFloat eta = dot(p, s);
  if (!(eta > 0.0)) fail(Errc::NotPositiveDefinite, "initial <p,Ap> <= 0");
  BigFloat a = nu / eta;
  tr.coeff_a.push_back(a);
  record(x, r, rnorm0);

  for (std::size_t k = 1; k <= max_iter; ++k) {
    axpy(x, a, p);
    axmy(r, a, s);
    orthogonalize_against(r, qs, 2);
    BigFloat nu_new = dot(r, r);
    BigFloat bk = (nu_new == 0.0) ? zero : nu_new / nu;
    tr.coeff_b.push_back(bk);
    BigFloat rn = sqrt(nu_new);
    record(x, r, rn);
    if (nu_new == 0.0 || rn <= floor_tol * rnorm0) {
      tr.stop = StopReason::ResidualZero;
      break;
    }
    {
      Vec<BigFloat> qk = r;
      BigFloat inv = ctx.make(1.0) / rn;
      scal(qk, inv);
      qs.push_back(std::move(qk));
    }
    for (std::size_t i = 0; i < n; ++i) {
      BigFloat v = r[i];
      add_product(v, bk, p[i]);
      p[i] = std::move(v);
    }
    s = matvec(A, p);
    BigFloat mu = dot(p, s);
    if (!(mu > 0.0)) {
      // Krylov space exhausted at context precision; residual is noise.
      tr.stop = StopReason::ResidualZero;
      break;
    }
    a = nu_new / mu;
    tr.coeff_a.push_back(a);
    nu = nu_new;
    if (opts.stop_tol > 0.0 && out.err_anorm_rel.back() <= opts.stop_tol) {
      tr.stop = StopReason::MaxIter;
      break;
    }
  }
  if (tr.coeff_a.size() > tr.iterations()) tr.coeff_a.resize(tr.iterations());
  return out;
}

inline ExactCgResult exact_cg(const Problem& p, std::size_t max_iter, const PrecisionContext& ctx,
                              const ExactCgOptions& opts = {}) {
  return exact_cg(promote(p.A.mat(), ctx.bits()), promote(p.b, ctx.bits()),
                  promote(p.x0, ctx.bits()), max_iter, ctx, opts);
}

// One of the three variants run entirely in context precision (no
// reorthogonalization): the recurrences behave like exact arithmetic for
// k <= n because rounding is pushed to the context floor.
inline CGTrace<BigFloat> run_cg_hp(const Problem& p, Variant variant, const SolveOptions& opts,
                                   const PrecisionContext& ctx) {
  Mat<BigFloat> A = promote(p.A.mat(), ctx.bits());
  Vec<BigFloat> b = promote(p.b, ctx.bits());
  Vec<BigFloat> x0 = promote(p.x0, ctx.bits());
  Vec<BigFloat> xt = promote(p.x_true, ctx.bits());
  Mat<BigFloat> L = cholesky(A);
  Instrumentation<BigFloat> instr;
  instr.x_true = &xt;
  instr.apply_inverse = [&L](const Vec<BigFloat>& y) { return cholesky_solve(L, y); };
  return run_cg_core(A, b, x0, variant, opts, &instr);
}

// Lanczos directions q_1..q_{J+1} = (-1)^k r_k/||r_k|| promoted from a trace.
struct LanczosBasis {
  std::vector<Vec<BigFloat>> q;  // q[k] is q_{k+1}, k = 0..J
};

template <typename S>
LanczosBasis promote_basis(const CGTrace<S>& trace, std::size_t J, mpfr_prec_t bits) {
  if (trace.updated_residuals.size() < J + 1) fail(Errc::MissingVectors, "trace vectors not recorded");
  LanczosBasis basis;
  basis.q.reserve(J + 1);
  for (std::size_t k = 0; k <= J; ++k) {
    Vec<BigFloat> rk = detail::to_meas_vec(trace.updated_residuals[k], bits);
    BigFloat rn = detail::to_meas(trace.rnorm[k], bits);
    BigFloat scale = BigFloat((k % 2) ? -1.0 : 1.0, bits) / rn;
    scal(rk, scale);
    basis.q.push_back(std::move(rk));
  }
  return basis;
}

struct RitzGroup {
  std::vector<std::size_t> members;  // indices into ritz_values (ascending)
  BigFloat value;                    // theta_i or cluster value
  BigFloat weight;                   // |S_{J,i}| or w_C = (sum S_{J,l}^2)^{1/2}
  bool is_cluster = false;
  bool converged = false;
};

struct RitzClassification {
  std::vector<BigFloat> ritz_values;  // ascending
  std::vector<BigFloat> weights;      // beta_J |S_{J,i}|
  std::vector<RitzGroup> groups;
  std::vector<Vec<BigFloat>> Y_hat;   // unconverged Ritz/cluster vectors, unit norm
  std::size_t m = 0;
  // health metrics printed by the extension driver
  double ortho_defect = 0.0;      // max |(Y^T Y - I)_{ij}| over Y_hat
  double max_q_next_inner = 0.0;  // max |<q_{J+1}, y>|
  double qJ_residual = 0.0;       // ||q_J - proj_{span Y_hat} q_J||
};

// Eigendecomposition of T_J in context precision, Ritz vectors Y = Q S,
// separation of Ritz values into well-separated ones and clusters by
// transitive closure of the gap relation, convergence tests against
// beta_J |S_{J,i}| resp. beta_J w_C, and assembly of the unconverged basis.
inline RitzClassification classify_ritz(const SpdMatrix& A, const Tridiagonal<double>& T,
                                        const LanczosBasis& basis, double cluster_width,
                                        double conv_tol, const PrecisionContext& ctx) {
  const std::size_t J = T.size();
  if (basis.q.size() < J + 1) fail(Errc::DimensionMismatch, "basis must hold q_1..q_{J+1}");
  const mpfr_prec_t bits = ctx.bits();
  const std::size_t n = basis.q[0].size();

  Tridiagonal<BigFloat> Tm;
  for (double v : T.alpha) Tm.alpha.emplace_back(v, bits);
  for (double v : T.beta) Tm.beta.emplace_back(v, bits);
  Tm.beta_last = BigFloat(T.beta_last, bits);

  RitzClassification cls;
  cls.ritz_values = tridiag_eigenvalues(Tm);
  Mat<BigFloat> S = tridiag_eigenvectors(Tm, cls.ritz_values);

  const BigFloat anorm(A.norm2(), bits);
  const BigFloat beta_J = Tm.beta_last;
  const BigFloat gap_tol = BigFloat(cluster_width, bits) * anorm;
  const BigFloat conv_bound = BigFloat(conv_tol, bits) * anorm;

  for (std::size_t i = 0; i < J; ++i) cls.weights.push_back(abs(beta_J * S(J - 1, i)));

  // Ritz vectors y_i = Q_J S(:,i)
  auto ritz_vector = [&](std::size_t i) {
    Vec<BigFloat> y(n, BigFloat(0.0, bits));
    for (std::size_t j = 0; j < J; ++j) axpy(y, S(j, i), basis.q[j]);
    return y;
  };

  std::size_t i = 0;
  while (i < J) {
    std::size_t j = i;
    while (j + 1 < J && cls.ritz_values[j + 1] - cls.ritz_values[j] <= gap_tol) ++j;
    RitzGroup g;
    for (std::size_t l = i; l <= j; ++l) g.members.push_back(l);
    if (g.members.size() == 1) {
      g.is_cluster = false;
      g.value = cls.ritz_values[i];
      g.weight = abs(S(J - 1, i));
      g.converged = (beta_J * g.weight <= conv_bound);
      if (!g.converged) {
        Vec<BigFloat> y = ritz_vector(i);
        BigFloat ny = nrm2(y);
        BigFloat inv = BigFloat(1.0, bits) / ny;
        scal(y, inv);
        cls.Y_hat.push_back(std::move(y));
      }
    } else {
      g.is_cluster = true;
      g.value = (cls.ritz_values[i] + cls.ritz_values[j]) / BigFloat(2.0, bits);
      BigFloat w2(0.0, bits);
      for (std::size_t l : g.members) add_product(w2, S(J - 1, l), S(J - 1, l));
      g.weight = sqrt(w2);
      g.converged = (beta_J * g.weight <= conv_bound);
      if (!g.converged) {
        Vec<BigFloat> y(n, BigFloat(0.0, bits));
        for (std::size_t l : g.members) {
          Vec<BigFloat> yl = ritz_vector(l);
          axpy(y, S(J - 1, l), yl);
        }
        BigFloat inv = BigFloat(1.0, bits) / g.weight;
        scal(y, inv);
        BigFloat ny = nrm2(y);
        inv = BigFloat(1.0, bits) / ny;
        scal(y, inv);
        cls.Y_hat.push_back(std::move(y));
      }
    }
    cls.groups.push_back(std::move(g));
    i = j + 1;
  }
  cls.m = cls.Y_hat.size();

  // health metrics
  for (std::size_t a1 = 0; a1 < cls.m; ++a1)
    for (std::size_t b1 = a1; b1 < cls.m; ++b1) {
      double v = abs(dot(cls.Y_hat[a1], cls.Y_hat[b1]) -
                     BigFloat(a1 == b1 ? 1.0 : 0.0, bits)).to_double();
      cls.ortho_defect = std::max(cls.ortho_defect, v);
    }
  for (std::size_t a1 = 0; a1 < cls.m; ++a1)
    cls.max_q_next_inner =
        std::max(cls.max_q_next_inner, abs(dot(basis.q[J], cls.Y_hat[a1])).to_double());
  {
    Vec<BigFloat> res = basis.q[J - 1];
    orthogonalize_against(res, cls.Y_hat, 2);
    cls.qJ_residual = nrm2(res).to_double();
  }
  return cls;
}

struct ExtendResult {
  Tridiagonal<BigFloat> T_ext;
  std::vector<Vec<BigFloat>> Q_ext;  // q_1..q_J promoted, then the extension vectors
  std::size_t J = 0;
  std::size_t m = 0;
  std::vector<BigFloat> eigenvalues;   // of T_ext, ascending
  std::vector<double> eig_distances;   // per-eigenvalue distance to spectrum(A)
  double max_eig_distance = 0.0;
  double min_eig = 0.0;
  double kappa_T = 0.0;
  double relation_residual = 0.0;      // max_k ||(A Q - Q T_ext)(:,k)|| / ||A||
  double orthogonality_defect = 0.0;   // extension block against itself and Y_hat
  double final_beta = 0.0;             // trailing candidate norm at exhaustion
  bool early_termination = false;
  std::vector<std::size_t> basis_restarts;
};

// Appendix extension: q_{J+1} is minimally modified to be exactly orthogonal
// to the unconverged basis, then the three-term Lanczos recurrence on A runs
// in context precision with every new vector orthogonalized exactly against
// Y_hat and all previously generated extension vectors (two-pass MGS).
// Terminates at J+n-m total columns or when the new beta falls below
// 10^{-(digits-10)} ||A||.
inline ExtendResult extend_T(const SpdMatrix& A, const Tridiagonal<double>& T,
                             const LanczosBasis& basis, const RitzClassification& cls,
                             const PrecisionContext& ctx) {
  if (ctx.digits() < 32) fail(Errc::PrecisionTooLow, "extend_T needs >= 32 digits");
  const mpfr_prec_t bits = ctx.bits();
  const std::size_t n = A.dim();
  const std::size_t J = T.size();
  const std::size_t m = cls.m;
  if (basis.q.size() < J + 1) fail(Errc::DimensionMismatch, "basis must hold q_1..q_{J+1}");

  Mat<BigFloat> Am = promote(A.mat(), bits);
  const BigFloat anorm(A.norm2(), bits);
  const BigFloat beta_min = ctx.pow10(-(ctx.digits() - 10)) * anorm;
  const BigFloat one(1.0, bits);

  ExtendResult res;
  res.J = J;
  res.m = m;
  for (double v : T.alpha) res.T_ext.alpha.emplace_back(v, bits);
  for (double v : T.beta) res.T_ext.beta.emplace_back(v, bits);

  const std::size_t target = (n > m) ? (n - m) : 0;
  std::vector<Vec<BigFloat>> V;  // extension vectors

  SplitMix64 restart_rng(0xb0ba5eedULL);
  auto random_direction = [&]() {
    Vec<BigFloat> z(n, BigFloat(0.0, bits));
    for (auto& zi : z) zi = BigFloat(restart_rng.next_gaussian(), bits);
    orthogonalize_against(z, cls.Y_hat, 2);
    orthogonalize_against(z, V, 2);
    BigFloat nz = nrm2(z);
    BigFloat inv = one / nz;
    scal(z, inv);
    return z;
  };

  if (target > 0) {
    Vec<BigFloat> v1 = basis.q[J];
    orthogonalize_against(v1, cls.Y_hat, 2);
    BigFloat nv = nrm2(v1);
    if (nv <= beta_min) {
      res.basis_restarts.push_back(0);
      v1 = random_direction();
    } else {
      BigFloat inv = one / nv;
      scal(v1, inv);
    }
    V.push_back(std::move(v1));

    BigFloat beta_prev = BigFloat(T.beta_last, bits);
    for (std::size_t j = 1; j <= target; ++j) {
      const Vec<BigFloat>& vj = V[j - 1];
      Vec<BigFloat> z = matvec(Am, vj);
      BigFloat alpha = dot(vj, z);
      res.T_ext.alpha.push_back(alpha);
      if (j == 1)
        res.T_ext.beta.push_back(beta_prev);  // beta_J joins the blocks
      axmy(z, alpha, vj);
      const Vec<BigFloat>& prev = (j == 1) ? basis.q[J - 1] : V[j - 2];
      axmy(z, beta_prev, prev);

      BigFloat pre_norm = nrm2(z);
      bool restarted = false;
      if (pre_norm <= beta_min) {
        // genuine invariant subspace found early
        if (j == target) {
          res.final_beta = pre_norm.to_double();
          break;
        }
        res.basis_restarts.push_back(j);
        restarted = true;
      }
      orthogonalize_against(z, cls.Y_hat, 2);
      orthogonalize_against(z, V, 2);
      BigFloat beta_new = nrm2(z);
      if (j == target) {
        res.final_beta = beta_new.to_double();
        break;
      }
      if (restarted) {
        Vec<BigFloat> vnext = random_direction();
        res.T_ext.beta.push_back(pre_norm);
        beta_prev = pre_norm;
        V.push_back(std::move(vnext));
        continue;
      }
      if (beta_new <= beta_min) {
        res.final_beta = beta_new.to_double();
        res.early_termination = true;
        break;
      }
      BigFloat inv = one / beta_new;
      scal(z, inv);
      res.T_ext.beta.push_back(beta_new);
      beta_prev = beta_new;
      V.push_back(std::move(z));
    }
  }
  res.T_ext.beta_last = BigFloat(res.final_beta, bits);

  // spectrum distances
  res.eigenvalues = tridiag_eigenvalues(res.T_ext);
  const std::vector<double>& spectrum = A.spectral().eigenvalues;
  for (const auto& ev : res.eigenvalues) {
    BigFloat best(-1.0, bits);
    for (double lam : spectrum) {
      BigFloat d = abs(ev - BigFloat(lam, bits));
      if (best < 0.0 || d < best) best = d;
    }
    res.eig_distances.push_back(best.to_double());
    res.max_eig_distance = std::max(res.max_eig_distance, best.to_double());
  }
  res.min_eig = res.eigenvalues.front().to_double();
  double max_eig = res.eigenvalues.back().to_double();
  res.kappa_T = (res.min_eig > 0.0) ? max_eig / res.min_eig : 0.0;

  // assemble Q_ext and the relation residual
  res.Q_ext.reserve(J + V.size());
  for (std::size_t k = 0; k < J; ++k) res.Q_ext.push_back(basis.q[k]);
  for (auto& v : V) res.Q_ext.push_back(std::move(v));
  {
    const std::size_t N = res.Q_ext.size();
    for (std::size_t k = 0; k < N; ++k) {
      Vec<BigFloat> col = matvec(Am, res.Q_ext[k]);
      if (k > 0) axmy(col, res.T_ext.beta[k - 1], res.Q_ext[k - 1]);
      axmy(col, res.T_ext.alpha[k], res.Q_ext[k]);
      if (k + 1 < N) axmy(col, res.T_ext.beta[k], res.Q_ext[k + 1]);
      double rel = (nrm2(col) / anorm).to_double();
      res.relation_residual = std::max(res.relation_residual, rel);
    }
    // orthogonality of the extension block (and against Y_hat)
    const std::size_t base = J;
    for (std::size_t a1 = base; a1 < N; ++a1) {
      for (std::size_t b1 = a1; b1 < N; ++b1) {
        double v = abs(dot(res.Q_ext[a1], res.Q_ext[b1]) -
                       BigFloat(a1 == b1 ? 1.0 : 0.0, bits)).to_double();
        res.orthogonality_defect = std::max(res.orthogonality_defect, v);
      }
      for (const auto& y : cls.Y_hat) {
        double v = abs(dot(res.Q_ext[a1], y)).to_double();
        res.orthogonality_defect = std::max(res.orthogonality_defect, v);
      }
    }
  }
  return res;
}

struct MatchReport {
  std::vector<double> fp_err_rel;     // finite-precision updated A-norm error, normalized
  std::vector<double> exact_err_rel;  // T-norm error of exact CG on T_ext, normalized
  std::vector<double> ratio;          // exact/fp, k = 1..J
  double r0hat_max_rel_discrepancy = 0.0;
  std::vector<std::size_t> ambiguous_assignments;  // T_ext eigenvalue indices with ties
};

// Exact CG applied to (T_ext, beta xi_1) in context precision, compared
// step-by-step with the finite-precision run's updated-residual A-norm error,
// plus the component-weight check of the initial residual.
inline MatchReport verify_extension(const SpdMatrix& A, const ExtendResult& ext,
                                    const CGTrace<double>& trace, const PrecisionContext& ctx) {
  const mpfr_prec_t bits = ctx.bits();
  const std::size_t J = ext.J;
  if (trace.updated_anorm_err.size() < J + 1)
    fail(Errc::MissingVectors, "trace lacks updated A-norm error series");

  MatchReport rep;
  const std::size_t N = ext.T_ext.size();
  Mat<BigFloat> Td = to_dense(ext.T_ext);
  Vec<BigFloat> b(N, BigFloat(0.0, bits));
  b[0] = BigFloat(trace.rnorm[0], bits);
  Vec<BigFloat> x0(N, BigFloat(0.0, bits));
  ExactCgOptions opts;
  opts.record_vectors = false;
  ExactCgResult run = exact_cg(Td, b, x0, J, ctx, opts);

  const double fp0 = trace.updated_anorm_err[0];
  for (std::size_t k = 0; k <= J; ++k) {
    double fp = trace.updated_anorm_err[k] / fp0;
    double ex = (k < run.err_anorm_rel.size()) ? run.err_anorm_rel[k].to_double() : 0.0;
    rep.fp_err_rel.push_back(fp);
    rep.exact_err_rel.push_back(ex);
    if (k >= 1) rep.ratio.push_back(fp > 0.0 ? ex / fp : 0.0);
  }

  // r0hat check: sum of squared first components of T_ext eigenvectors in
  // each interval vs squared components of r_0 along eigenvectors of A.
  const SpectralData& sd = A.spectral();
  const std::size_t n = A.dim();
  Mat<BigFloat> Svec = tridiag_eigenvectors(ext.T_ext, ext.eigenvalues);
  std::vector<BigFloat> W(n, BigFloat(0.0, bits));
  for (std::size_t i = 0; i < N; ++i) {
    double ev = ext.eigenvalues[i].to_double();
    // nearest spectrum point; ties assigned to the lower and flagged
    std::size_t best = 0;
    double bestd = std::abs(sd.eigenvalues[0] - ev);
    for (std::size_t l = 1; l < n; ++l) {
      double d = std::abs(sd.eigenvalues[l] - ev);
      if (d < bestd) {
        bestd = d;
        best = l;
      } else if (d == bestd) {
        rep.ambiguous_assignments.push_back(i);
      }
    }
    BigFloat c = b[0] * Svec(0, i);
    add_product(W[best], c, c);
  }
  const Vec<double> r0 = trace.updated_residuals.empty() ? Vec<double>() : trace.updated_residuals[0];
  if (!r0.empty()) {
    double r0n2 = dot(r0, r0);
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      for (std::size_t row = 0; row < n; ++row) c += sd.eigenvectors(row, i) * r0[row];
      double wi = c * c;
      if (wi > 0x1p-53 * r0n2) {
        double disc = std::abs(W[i].to_double() - wi) / wi;
        rep.r0hat_max_rel_discrepancy = std::max(rep.r0hat_max_rel_discrepancy, disc);
      }
    }
  }
  return rep;
}

}  // namespace cgfp
