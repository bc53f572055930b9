#pragma once

// The band-limited family f(x) = ((1+a)/2 e^{ix/N} + (1-a)/2 e^{-ix/N})^N, its
// binomial Fourier decomposition, and the odd box state built from it.

#include <complex>
#include <iosfwd>
#include <vector>

#include "superosc/extended_float.hpp"

namespace superosc {

using cplx = std::complex<double>;

/// Largest decimal dynamic range (N log10 max(alpha, 1)) the library accepts.
inline constexpr double kMaxDecimalRange = 300.0;

struct SuperoscSpec {
  int n_order = 100;
  double alpha = 4.0;
  double unit_length = 1.0;

  /// Throws ParameterRangeError.
  void validate() const;
  [[nodiscard]] double half_length() const;
  /// sqrt(N) a: the loose extent of the superoscillatory region.
  [[nodiscard]] double sqrt_n_scale() const;
  /// sqrt(2N/(alpha^2-1)) a: where the quadratic term of log f reaches one.
  [[nodiscard]] double second_order_scale() const;
  /// ln of the largest |c_n| sum, i.e. ln sum_n |c_n| = N ln max(alpha, 1).
  [[nodiscard]] double log_coefficient_mass() const;
};

struct FourierMode {
  int index = 0;
  double wavenumber = 0.0;   // k_n = (2n/N - 1)/a
  double coefficient = 0.0;  // c(n; N, alpha)
  double log_abs_coefficient = 0.0;
  int sign = 0;
};

std::vector<FourierMode> binomial_coefficients(const SuperoscSpec& spec);

/// Coefficients c_n rounded to `bits` of precision (exact binomials).
std::vector<ExtFloat> binomial_coefficients_extended(const SuperoscSpec& spec, mpfr_prec_t bits);

/// f(x) from the product form, evaluated as exp(N log(cos u + i alpha sin u)).
cplx eval_f(const SuperoscSpec& spec, double x);

/// (ln|f(x)|, arg f(x)) without leaving log space.
std::pair<double, double> eval_log_f(const SuperoscSpec& spec, double x);

/// f(x) from the Fourier sum. bits == 0 sums in double; otherwise in MPFR.
cplx eval_f_sum(const SuperoscSpec& spec, double x, mpfr_prec_t bits = 0);

struct SineMode {
  int index = 0;             // n with k_n > 0
  double wavenumber = 0.0;
  double amplitude = 0.0;    // coefficient of sin(k x) in the normalized psi
};

struct BoxStateSpec {
  SuperoscSpec spec;
  double norm_constant = 1.0;
  double log_norm_constant = 0.0;
  std::vector<SineMode> sine_modes;

  /// Sum of amplitude^2 * (pi N a) over modes.
  [[nodiscard]] double norm_squared() const;
};

BoxStateSpec build_box_state(const SuperoscSpec& spec);

/// Unnormalized sine amplitudes u_k = -2 (c_n - c_{N-n}) in MPFR; psi = sum u_k sin(kx) / Norm.
std::vector<ExtFloat> unnormalized_sine_amplitudes(const BoxStateSpec& state, mpfr_prec_t bits);

/// psi(x) = (i/Norm)(f - f*) = -2 Im f(x) / Norm.
double eval_psi(const BoxStateSpec& state, double x);

/// psi(x) from the double-precision sine-mode sum (cancels badly near the centre for large N).
double eval_psi_modes(const BoxStateSpec& state, double x);

struct RegionReport {
  double radius = 0.0;
  double max_deviation = 0.0;  // max |f e^{-i alpha x} - 1|
  double wavenumber_min = 0.0;
  double wavenumber_max = 0.0;
  double sqrt_n_scale = 0.0;
  double second_order_scale = 0.0;
  int samples = 0;
};

/// d(arg f)/dx, from the logarithmic derivative of the product form.
double local_wavenumber(const SuperoscSpec& spec, double x);

RegionReport superosc_region_report(const SuperoscSpec& spec, double radius);

/// max over the box of ln|f|, by dense sampling.
double log_max_abs_f(const SuperoscSpec& spec, int samples = 20001);

void write_mode_table_csv(std::ostream& os, const std::vector<FourierMode>& modes);

}  // namespace superosc
