#pragma once

// Thin RAII value type over an MPFR number. Only the handful of operations the
// mode-sum kernels need are exposed; precision is fixed per object at
// construction and results inherit the precision of the left operand.

#include <mpfr.h>

#include <complex>
#include <utility>

namespace superosc {

class ExtFloat {
 public:
  explicit ExtFloat(mpfr_prec_t bits = 128) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  ExtFloat(double x, mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_d(v_, x, MPFR_RNDN); }
  ExtFloat(const ExtFloat& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  ExtFloat(ExtFloat&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  ExtFloat& operator=(const ExtFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  ExtFloat& operator=(ExtFloat&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~ExtFloat() { mpfr_clear(v_); }

  [[nodiscard]] mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  [[nodiscard]] double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  /// Natural log of |x|; -inf for zero. Safe beyond the double exponent range.
  [[nodiscard]] double log_abs() const;
  [[nodiscard]] int sign() const { return mpfr_sgn(v_); }
  /// x * e^{-shift} rounded to double, for values whose magnitude does not fit a double.
  [[nodiscard]] double scaled_to_double(double log_shift) const;

  ExtFloat& operator+=(const ExtFloat& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  ExtFloat& operator-=(const ExtFloat& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  ExtFloat& operator*=(const ExtFloat& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  ExtFloat& operator/=(const ExtFloat& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
  ExtFloat& operator*=(double d) { mpfr_mul_d(v_, v_, d, MPFR_RNDN); return *this; }
  /// this += a * b
  void fma_add(const ExtFloat& a, const ExtFloat& b) { mpfr_fma(v_, a.v_, b.v_, v_, MPFR_RNDN); }
  /// this -= a * b
  void fms_sub(const ExtFloat& a, const ExtFloat& b) { mpfr_fms(v_, a.v_, b.v_, v_, MPFR_RNDN); mpfr_neg(v_, v_, MPFR_RNDN); }

  friend ExtFloat operator+(ExtFloat a, const ExtFloat& b) { return a += b; }
  friend ExtFloat operator-(ExtFloat a, const ExtFloat& b) { return a -= b; }
  friend ExtFloat operator*(ExtFloat a, const ExtFloat& b) { return a *= b; }
  friend ExtFloat operator/(ExtFloat a, const ExtFloat& b) { return a /= b; }
  ExtFloat operator-() const {
    ExtFloat r(*this);
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
  }

  static ExtFloat pi(mpfr_prec_t bits);
  /// Exact binomial coefficient C(n, k) rounded to the target precision.
  static ExtFloat binomial(unsigned long n, unsigned long k, mpfr_prec_t bits);
  [[nodiscard]] ExtFloat pow(unsigned long e) const;
  [[nodiscard]] ExtFloat sqrt() const;
  /// (sin x, cos x)
  [[nodiscard]] std::pair<ExtFloat, ExtFloat> sin_cos() const;

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

 private:
  mpfr_t v_;
};

/// Precision (bits) for a mode sum whose terms reach e^{log_term_scale} times
/// the size of the smallest value that must survive the cancellation.
mpfr_prec_t precision_for_cancellation(double log_term_scale, int guard_bits = 64);

}  // namespace superosc
