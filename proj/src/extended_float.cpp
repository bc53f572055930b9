#include "superosc/extended_float.hpp"

#include <gmp.h>

#include <cmath>
#include <limits>

namespace superosc {

double ExtFloat::log_abs() const {
  if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
  long exp2 = 0;
  const double mant = mpfr_get_d_2exp(&exp2, v_, MPFR_RNDN);
  return std::log(std::abs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

double ExtFloat::scaled_to_double(double log_shift) const {
  if (mpfr_zero_p(v_)) return 0.0;
  long exp2 = 0;
  const double mant = mpfr_get_d_2exp(&exp2, v_, MPFR_RNDN);
  return mant * std::exp(static_cast<double>(exp2) * std::log(2.0) - log_shift);
}

ExtFloat ExtFloat::pi(mpfr_prec_t bits) {
  ExtFloat r(bits);
  mpfr_const_pi(r.v_, MPFR_RNDN);
  return r;
}

ExtFloat ExtFloat::binomial(unsigned long n, unsigned long k, mpfr_prec_t bits) {
  mpz_t z;
  mpz_init(z);
  mpz_bin_uiui(z, n, k);
  ExtFloat r(bits);
  mpfr_set_z(r.v_, z, MPFR_RNDN);
  mpz_clear(z);
  return r;
}

ExtFloat ExtFloat::pow(unsigned long e) const {
  ExtFloat r(precision());
  mpfr_pow_ui(r.v_, v_, e, MPFR_RNDN);
  return r;
}

ExtFloat ExtFloat::sqrt() const {
  ExtFloat r(precision());
  mpfr_sqrt(r.v_, v_, MPFR_RNDN);
  return r;
}

std::pair<ExtFloat, ExtFloat> ExtFloat::sin_cos() const {
  ExtFloat s(precision());
  ExtFloat c(precision());
  mpfr_sin_cos(s.v_, c.v_, v_, MPFR_RNDN);
  return {std::move(s), std::move(c)};
}

mpfr_prec_t precision_for_cancellation(double log_term_scale, int guard_bits) {
  const double bits = std::max(0.0, log_term_scale) / std::log(2.0);
  return static_cast<mpfr_prec_t>(53 + guard_bits + std::ceil(bits));
}

}  // namespace superosc
