#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cgfp/errors.hpp"

namespace cgfp {

// Multiprecision real backed by MPFR.  Every value carries its own precision;
// binary operations round the result at the wider of the two operand
// precisions, so mixing a promoted double (exact) with context-precision
// values keeps the context precision.
class BigFloat {
 public:
  BigFloat() {
    mpfr_init2(v_, 64);
    mpfr_set_zero(v_, 1);
  }
  explicit BigFloat(mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_zero(v_, 1);
  }
  BigFloat(double d, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, d, MPFR_RNDN);
  }
  BigFloat(const char* s, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    if (mpfr_set_str(v_, s, 10, MPFR_RNDN) != 0)
      fail(Errc::InvalidInput, std::string("cannot parse number '") + s + "'");
  }

  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  // Rebinds to `bits` precision, re-rounding the current value.
  void round_to(mpfr_prec_t bits) { mpfr_prec_round(v_, bits, MPFR_RNDN); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  // log10 of |x| as a double; usable even when the value's exponent is far
  // outside the double range.
  double log10_abs() const {
    if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
    BigFloat t(64);
    mpfr_abs(t.v_, v_, MPFR_RNDN);
    mpfr_log10(t.v_, t.v_, MPFR_RNDN);
    return mpfr_get_d(t.v_, MPFR_RNDN);
  }

  std::string str(int digits = 0) const {
    if (digits <= 0) digits = static_cast<int>(std::ceil(prec() * 0.30103)) + 2;
    char fmt[32];
    std::snprintf(fmt, sizeof fmt, "%%.%dRe", digits - 1);
    int need = mpfr_snprintf(nullptr, 0, fmt, v_);
    std::string out(static_cast<size_t>(need), '\0');
    mpfr_snprintf(out.data(), static_cast<size_t>(need) + 1, fmt, v_);
    return out;
  }

#define CGFP_BF_BINOP(op, fn)                                        \
  friend BigFloat operator op(const BigFloat& a, const BigFloat& b) { \
    BigFloat r(std::max(a.prec(), b.prec()));                         \
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                  \
    return r;                                                         \
  }
  CGFP_BF_BINOP(+, mpfr_add)
  CGFP_BF_BINOP(-, mpfr_sub)
  CGFP_BF_BINOP(*, mpfr_mul)
  CGFP_BF_BINOP(/, mpfr_div)
#undef CGFP_BF_BINOP

  BigFloat& operator+=(const BigFloat& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator-=(const BigFloat& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(const BigFloat& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator/=(const BigFloat& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

  friend BigFloat operator-(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
  friend bool operator!=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) != 0; }
  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }

  friend bool operator<(const BigFloat& a, double d) { return mpfr_cmp_d(a.v_, d) < 0; }
  friend bool operator>(const BigFloat& a, double d) { return mpfr_cmp_d(a.v_, d) > 0; }
  friend bool operator<=(const BigFloat& a, double d) { return mpfr_cmp_d(a.v_, d) <= 0; }
  friend bool operator>=(const BigFloat& a, double d) { return mpfr_cmp_d(a.v_, d) >= 0; }
  friend bool operator==(const BigFloat& a, double d) { return mpfr_cmp_d(a.v_, d) == 0; }

  friend BigFloat sqrt(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat abs(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_abs(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat cosh(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_cosh(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat acosh(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_acosh(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat cos(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_cos(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat log(const BigFloat& a) {
    BigFloat r(a.prec());
    mpfr_log(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat pow_int(const BigFloat& a, long k) {
    BigFloat r(a.prec());
    mpfr_pow_si(r.v_, a.v_, k, MPFR_RNDN);
    return r;
  }
  friend BigFloat max(const BigFloat& a, const BigFloat& b) { return a < b ? b : a; }
  friend BigFloat min(const BigFloat& a, const BigFloat& b) { return a < b ? a : b; }

  friend std::ostream& operator<<(std::ostream& os, const BigFloat& a) { return os << a.str(20); }

 private:
  mpfr_t v_;
};

inline BigFloat pi_at(mpfr_prec_t bits) {
  BigFloat r(bits);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}

// acc += a*b and acc -= a*b with a single rounding.
inline void add_product(BigFloat& acc, const BigFloat& a, const BigFloat& b) {
  mpfr_fma(acc.raw(), a.raw(), b.raw(), acc.raw(), MPFR_RNDN);
}
inline void sub_product(BigFloat& acc, const BigFloat& a, const BigFloat& b) {
  mpfr_fms(acc.raw(), a.raw(), b.raw(), acc.raw(), MPFR_RNDN);
  mpfr_neg(acc.raw(), acc.raw(), MPFR_RNDN);  // exact
}
inline void add_product(double& acc, double a, double b) { acc += a * b; }
inline void sub_product(double& acc, double a, double b) { acc -= a * b; }

// Decimal-digit precision context.  Binary precision is chosen so one MPFR
// rounding stays well below one unit in the last requested decimal digit.
class PrecisionContext {
 public:
  explicit PrecisionContext(int digits = 64) : digits_(digits), bits_(bits_for(digits)) {
    if (digits < 32) fail(Errc::PrecisionTooLow, "context requires >= 32 decimal digits");
  }

  static mpfr_prec_t bits_for(int digits) {
    return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873626)) + 8;
  }

  int digits() const { return digits_; }
  mpfr_prec_t bits() const { return bits_; }
  double log10_unit_roundoff() const { return -(static_cast<double>(bits_) - 1) * 0.30102999566398120; }

  BigFloat make(double v = 0.0) const { return BigFloat(v, bits_); }
  BigFloat parse(const char* s) const { return BigFloat(s, bits_); }
  // 10^e at context precision.
  BigFloat pow10(long e) const {
    BigFloat r(bits_);
    mpfr_set_si(r.raw(), 10, MPFR_RNDN);
    mpfr_pow_si(r.raw(), r.raw(), e, MPFR_RNDN);
    return r;
  }
  std::vector<BigFloat> vec(size_t n, double fill = 0.0) const {
    return std::vector<BigFloat>(n, make(fill));
  }

 private:
  int digits_;
  mpfr_prec_t bits_;
};

// Uniform construction/inspection for code templated on the scalar type.
template <typename R>
struct RealOps;

template <>
struct RealOps<double> {
  static double make(double v, const double&) { return v; }
  static double to_double(const double& x) { return x; }
  static double unit_roundoff(const double&) { return 0x1p-53; }
  static bool finite(const double& x) { return std::isfinite(x); }
};

template <>
struct RealOps<BigFloat> {
  static BigFloat make(double v, const BigFloat& like) { return BigFloat(v, like.prec()); }
  static double to_double(const BigFloat& x) { return x.to_double(); }
  static double unit_roundoff(const BigFloat& like) { return std::pow(2.0, -static_cast<double>(like.prec())); }
  static bool finite(const BigFloat& x) { return x.is_finite(); }
};

template <typename R>
R make_real(double v, const R& like) { return RealOps<R>::make(v, like); }
template <typename R>
double to_double(const R& x) { return RealOps<R>::to_double(x); }

}  // namespace cgfp
