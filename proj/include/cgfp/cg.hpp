#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cgfp/linalg.hpp"
#include "cgfp/spd.hpp"

namespace cgfp {

enum class Variant { HSCG, CGCG, GVCG };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::HSCG: return "hscg";
    case Variant::CGCG: return "cgcg";
    case Variant::GVCG: return "gvcg";
  }
  return "?";
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "hscg" || s == "HSCG") return Variant::HSCG;
  if (s == "cgcg" || s == "CGCG") return Variant::CGCG;
  if (s == "gvcg" || s == "GVCG") return Variant::GVCG;
  fail(Errc::InvalidInput, "unknown variant '" + s + "'");
}

struct SolveOptions {
  std::size_t max_iter = 100;
  bool residual_replacement = false;
  double replacement_threshold = 1.4901161193847656e-08;  // sqrt(2^-53)
  bool record_vectors = true;
};

enum class StopReason { MaxIter, ResidualZero, Breakdown, NotPositiveDefinite };

inline const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::MaxIter:             return "max_iter";
    case StopReason::ResidualZero:        return "residual_zero";
    case StopReason::Breakdown:           return "breakdown";
    case StopReason::NotPositiveDefinite: return "not_positive_definite";
  }
  return "?";
}

// Full per-iteration record of one solve.  Arrays indexed by iteration k:
// rnorm/true_rnorm/anorm_err/updated_anorm_err and the vector snapshots run
// k = 0..K; coeff_a holds a_0..a_{K-1}; coeff_b holds b_1..b_K.
template <typename R>
struct CGTrace {
  Variant variant = Variant::HSCG;
  std::vector<R> coeff_a;
  std::vector<R> coeff_b;
  std::vector<R> rnorm;
  std::vector<Vec<R>> iterates;
  std::vector<Vec<R>> updated_residuals;
  std::vector<Vec<R>> aux_p, aux_s, aux_w, aux_u, aux_t;
  std::vector<R> true_rnorm;
  std::vector<R> anorm_err;
  std::vector<R> updated_anorm_err;
  std::vector<std::size_t> replacement_steps;
  std::vector<std::size_t> negative_coeff_steps;  // k with recorded a_k <= 0
  StopReason stop = StopReason::MaxIter;
  std::string stop_detail;

  std::size_t iterations() const { return coeff_b.size(); }
};

// Optional per-step error instrumentation for the generic driver.
template <typename R>
struct Instrumentation {
  const Vec<R>* x_true = nullptr;
  std::function<Vec<R>(const Vec<R>&)> apply_inverse;  // A^{-1} y; may be empty
};

namespace detail {

template <typename R>
class TraceRecorder {
 public:
  TraceRecorder(CGTrace<R>& tr, const Mat<R>& A, const Vec<R>& b, const SolveOptions& opts,
                const Instrumentation<R>* instr)
      : tr_(tr), A_(A), b_(b), opts_(opts), instr_(instr) {}

  void step(const Vec<R>& x, const Vec<R>& r, const R& rnorm_val) {
    using std::sqrt;
    tr_.rnorm.push_back(rnorm_val);
    Vec<R> tres = b_;
    Vec<R> Ax = matvec(A_, x);
    for (std::size_t i = 0; i < tres.size(); ++i) tres[i] -= Ax[i];
    tr_.true_rnorm.push_back(nrm2(tres));
    if (opts_.record_vectors) {
      tr_.iterates.push_back(x);
      tr_.updated_residuals.push_back(r);
    }
    if (instr_ && instr_->x_true) {
      Vec<R> e = vsub(*instr_->x_true, x);
      R q = quad_form(A_, e, e);
      if (q < 0.0) q = make_real<R>(0.0, q);
      tr_.anorm_err.push_back(sqrt(q));
    }
    if (instr_ && instr_->apply_inverse) {
      Vec<R> z = instr_->apply_inverse(r);
      R q = dot(r, z);
      if (q < 0.0) q = make_real<R>(0.0, q);
      tr_.updated_anorm_err.push_back(sqrt(q));
    }
  }

 private:
  CGTrace<R>& tr_;
  const Mat<R>& A_;
  const Vec<R>& b_;
  const SolveOptions& opts_;
  const Instrumentation<R>* instr_;
};

}  // namespace detail

// Runs the selected variant with the exact operation order of its algorithm
// statement.  Stops at max_iter, at an exactly vanished updated residual, or
// at a breakdown (recorded, not thrown).  With residual_replacement on, the
// updated residual is replaced by b - A x_k whenever the two drift apart by
// more than replacement_threshold * ||b||, and the auxiliary vectors are
// recomputed from their definitions at that step.
template <typename R>
CGTrace<R> run_cg_core(const Mat<R>& A, const Vec<R>& b, const Vec<R>& x0, Variant variant,
                       const SolveOptions& opts, const Instrumentation<R>* instr = nullptr) {
  using std::sqrt;
  const std::size_t n = b.size();
  if (A.rows() != n || A.cols() != n || x0.size() != n)
    fail(Errc::DimensionMismatch, "run_cg shapes");
  if (opts.max_iter < 1) fail(Errc::InvalidInput, "max_iter must be >= 1");

  CGTrace<R> tr;
  tr.variant = variant;
  detail::TraceRecorder<R> rec(tr, A, b, opts, instr);

  const R zero = make_real<R>(0.0, b[0]);
  const R bnorm = nrm2(b);
  const R rep_thr = make_real<R>(opts.replacement_threshold, b[0]) * bnorm;

  // r_0 = b - A x_0
  Vec<R> x = x0;
  Vec<R> r = b;
  {
    Vec<R> Ax = matvec(A, x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= Ax[i];
  }
  R nu = dot(r, r);
  if (!(nu > 0.0)) fail(Errc::InvalidInput, "zero initial residual");

  Vec<R> p = r;
  Vec<R> s = (variant == Variant::HSCG) ? matvec(A, r) : matvec(A, p);
  Vec<R> w, u, t;
  if (variant == Variant::GVCG) {
    w = s;
    u = matvec(A, w);
  }
  R eta0 = dot(p, s);
  if (!RealOps<R>::finite(eta0) || eta0 == 0.0) {
    tr.stop = StopReason::Breakdown;
    tr.stop_detail = "initial <p,Ap> is zero or non-finite";
    rec.step(x, r, sqrt(nu));
    return tr;
  }
  if (eta0 < 0.0) {
    tr.stop = StopReason::NotPositiveDefinite;
    tr.stop_detail = "initial <p,Ap> < 0";
    rec.step(x, r, sqrt(nu));
    return tr;
  }
  R a = nu / eta0;
  tr.coeff_a.push_back(a);

  rec.step(x, r, sqrt(nu));
  tr.aux_p.push_back(p);
  if (variant != Variant::HSCG) tr.aux_s.push_back(s);
  if (variant == Variant::GVCG) {
    tr.aux_w.push_back(w);
    tr.aux_u.push_back(u);
  }

  auto record_negative = [&](const R& ak, std::size_t k) {
    if (!(ak > 0.0)) tr.negative_coeff_steps.push_back(k);
  };

  for (std::size_t k = 1; k <= opts.max_iter; ++k) {
    // x_k = x_{k-1} + a_{k-1} p_{k-1};  r_k = r_{k-1} - a_{k-1} s_{k-1}
    axpy(x, a, p);
    axmy(r, a, s);
    if (variant == Variant::GVCG) axmy(w, a, u);  // w_k = w_{k-1} - a_{k-1} u_{k-1}

    bool replaced = false;
    if (opts.residual_replacement) {
      Vec<R> tres = b;
      Vec<R> Ax = matvec(A, x);
      for (std::size_t i = 0; i < n; ++i) tres[i] -= Ax[i];
      Vec<R> gap = vsub(tres, r);
      if (nrm2(gap) > rep_thr) {
        r = tres;
        replaced = true;
        tr.replacement_steps.push_back(k);
      }
    }

    if (variant == Variant::CGCG || (variant == Variant::GVCG && replaced)) w = matvec(A, r);

    R nu_new = dot(r, r);
    if (!RealOps<R>::finite(nu_new)) {
      tr.stop = StopReason::Breakdown;
      tr.stop_detail = "<r,r> non-finite at k=" + std::to_string(k);
      break;
    }
    R bk = nu_new / nu;
    tr.coeff_b.push_back(bk);

    if (nu_new == 0.0) {
      rec.step(x, r, zero);
      tr.aux_p.push_back(r);  // p_k = r_k + b_k p_{k-1} with b_k = 0
      if (variant != Variant::HSCG) tr.aux_s.push_back(make_vec(n, b[0]));
      if (variant == Variant::GVCG) {
        tr.aux_w.push_back(w);
        tr.aux_u.push_back(make_vec(n, b[0]));
        tr.aux_t.push_back(make_vec(n, b[0]));
      }
      tr.stop = StopReason::ResidualZero;
      break;
    }

    if (variant == Variant::HSCG) {
      // p_k = r_k + b_k p_{k-1};  s_k = A p_k;  mu_k = <p_k,s_k>;  a_k = nu_k/mu_k
      for (std::size_t i = 0; i < n; ++i) {
        R v = r[i];
        add_product(v, bk, p[i]);
        p[i] = std::move(v);
      }
      s = matvec(A, p);
      R mu = dot(p, s);
      rec.step(x, r, sqrt(nu_new));
      tr.aux_p.push_back(p);
      nu = nu_new;
      if (!RealOps<R>::finite(mu) || mu == 0.0) {
        tr.stop = StopReason::Breakdown;
        tr.stop_detail = "<p,Ap> zero or non-finite at k=" + std::to_string(k);
        break;
      }
      if (mu < 0.0) {
        tr.stop = StopReason::NotPositiveDefinite;
        tr.stop_detail = "<p,Ap> < 0 at k=" + std::to_string(k);
        break;
      }
      a = nu_new / mu;
      tr.coeff_a.push_back(a);
      record_negative(a, k);
    } else {
      // eta_k = <r_k,w_k>;  a_k = nu_k / (eta_k - (b_k/a_{k-1}) nu_k)
      R eta = dot(r, w);
      R denom = eta - (bk / a) * nu_new;
      if (variant == Variant::GVCG && !replaced) t = matvec(A, w);  // t_k = A w_k
      // p_k = r_k + b_k p_{k-1}
      for (std::size_t i = 0; i < n; ++i) {
        R v = r[i];
        add_product(v, bk, p[i]);
        p[i] = std::move(v);
      }
      if (replaced) {
        s = matvec(A, p);
        if (variant == Variant::GVCG) {
          u = matvec(A, s);
          t = matvec(A, w);
        }
      } else {
        // s_k = w_k + b_k s_{k-1};  u_k = t_k + b_k u_{k-1}
        for (std::size_t i = 0; i < n; ++i) {
          R v = w[i];
          add_product(v, bk, s[i]);
          s[i] = std::move(v);
        }
        if (variant == Variant::GVCG)
          for (std::size_t i = 0; i < n; ++i) {
            R v = t[i];
            add_product(v, bk, u[i]);
            u[i] = std::move(v);
          }
      }
      rec.step(x, r, sqrt(nu_new));
      tr.aux_p.push_back(p);
      tr.aux_s.push_back(s);
      if (variant == Variant::GVCG) {
        tr.aux_w.push_back(w);
        tr.aux_u.push_back(u);
        tr.aux_t.push_back(t);
      }
      nu = nu_new;
      if (!RealOps<R>::finite(denom) || denom == 0.0) {
        tr.stop = StopReason::Breakdown;
        tr.stop_detail = "a_k denominator zero or non-finite at k=" + std::to_string(k);
        break;
      }
      a = nu_new / denom;
      tr.coeff_a.push_back(a);
      record_negative(a, k);
    }
  }

  const std::size_t K = tr.iterations();
  if (tr.coeff_a.size() > K) tr.coeff_a.resize(K);
  return tr;
}

// Working-precision solve with full instrumentation; checks positive
// definiteness of A up front (not at construction time).
inline CGTrace<double> run_cg(const Problem& problem, Variant variant, const SolveOptions& opts) {
  const SpectralData& sd = problem.A.spectral();
  if (!sd.positive_definite) fail(Errc::NotPositiveDefinite, "solver requires SPD matrix");
  Instrumentation<double> instr;
  instr.x_true = &problem.x_true;
  instr.apply_inverse = [&problem](const Vec<double>& y) { return problem.A.apply_inverse(y); };
  return run_cg_core(problem.A.mat(), problem.b, problem.x0, variant, opts, &instr);
}

struct ErrorHistory {
  std::vector<double> anorm_err_rel;
  std::vector<double> true_rnorm_rel;
  std::vector<double> updated_anorm_err_rel;
  std::size_t plateau_index = 0;  // == series length when no plateau was found
};

// Normalized error series plus plateau detection: the plateau starts at the
// first k whose true-residual norm fails to decrease by at least 1% over the
// following 20 steps.
inline ErrorHistory error_history(const CGTrace<double>& trace, const Problem& problem) {
  CGTrace<double> scratch;
  const CGTrace<double>* tr = &trace;
  if (trace.anorm_err.empty() || trace.updated_anorm_err.empty()) {
    if (trace.iterates.empty() || trace.updated_residuals.empty())
      fail(Errc::MissingVectors, "error_history needs recorded vectors");
    scratch = trace;
    scratch.anorm_err.clear();
    scratch.updated_anorm_err.clear();
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
      Vec<double> e = vsub(problem.x_true, trace.iterates[k]);
      double q = quad_form(problem.A.mat(), e, e);
      scratch.anorm_err.push_back(std::sqrt(std::max(q, 0.0)));
      Vec<double> z = problem.A.apply_inverse(trace.updated_residuals[k]);
      double q2 = dot(trace.updated_residuals[k], z);
      scratch.updated_anorm_err.push_back(std::sqrt(std::max(q2, 0.0)));
    }
    tr = &scratch;
  }
  ErrorHistory h;
  auto normalize = [](const std::vector<double>& v, std::vector<double>& out) {
    if (v.empty()) fail(Errc::MissingVectors, "empty error series");
    if (!(v[0] > 0.0)) fail(Errc::InvalidInput, "step-0 normalizer must be positive");
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / v[0];
  };
  normalize(tr->anorm_err, h.anorm_err_rel);
  normalize(tr->true_rnorm, h.true_rnorm_rel);
  normalize(tr->updated_anorm_err, h.updated_anorm_err_rel);

  const std::size_t len = h.true_rnorm_rel.size();
  h.plateau_index = len;
  for (std::size_t k = 0; k + 20 < len; ++k) {
    if (h.true_rnorm_rel[k + 20] > 0.99 * h.true_rnorm_rel[k]) {
      h.plateau_index = k;
      break;
    }
  }
  return h;
}

// First step k with series[k] <= target, or the series length if never.
inline std::size_t steps_to_reach(const std::vector<double>& series, double target) {
  for (std::size_t k = 0; k < series.size(); ++k)
    if (series[k] <= target) return k;
  return series.size();
}

}  // namespace cgfp
