#pragma once

// Hot loops. Every kernel exists twice: serial:: is the straightforward
// reference used by the tests, parallel:: is the OpenMP version the pipeline
// calls. Reductions in parallel:: run in a fixed order per thread count.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "superosc/extended_float.hpp"

namespace superosc::kernels {

using cplx = std::complex<double>;

/// Box eigenfunction in centred form: sin(k_m (x + h)) / sqrt(h) with k_m h = m pi / 2.
inline double box_mode_value(int m, double k, double x, double inv_sqrt_h) {
  const int quarter = (m / 2) % 2;  // sign (-1)^{floor(m/2)}
  const double s = quarter == 0 ? 1.0 : -1.0;
  return (m % 2 == 0 ? s * std::sin(k * x) : s * std::cos(k * x)) * inv_sqrt_h;
}

struct ModeSet {
  std::vector<int> index;      // m
  std::vector<double> wavenumber;
  double inv_sqrt_h = 1.0;
};

/// Mode table in extended precision: amplitudes, energies and the basis sampled at a point set.
struct ExtendedSynthesis {
  mpfr_prec_t bits = 128;
  std::vector<ExtFloat> amplitude;  // per mode, real
  std::vector<ExtFloat> energy;     // per mode
  std::vector<ExtFloat> basis;      // mode-major: basis[m * points + p]
  std::size_t points = 0;
};

namespace serial {

/// out[p] = sum_m amp[m] phi_m(x[p])
void synthesize_modes(std::span<const double> x, const ModeSet& modes, std::span<const cplx> amp,
                      std::span<cplx> out);

/// out[s * points + p] = e^{-shift} sum_m A_m e^{-i E_m t_s} basis[m][p]
void synthesize_extended(const ExtendedSynthesis& table, std::span<const double> times, double log_shift,
                         std::span<cplx> out);

/// out[s * rows + r] = sum_c table[r * cols + c] v[s * cols + c]
void apply_real_table(std::span<const double> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                      std::size_t batches, std::span<cplx> out);

void apply_complex_table(std::span<const cplx> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                         std::size_t batches, std::span<cplx> out);

/// acc[j] += sum_r |sum_s c_s x[r * samples + s] e^{2 pi i j s / q}|^2, j < q
void fold_power(std::span<const cplx> x, std::size_t rows, std::size_t samples, std::span<const cplx> c,
                std::size_t q, std::span<double> acc);

/// out[t] = sum_j p_j e^{i E_j tau_t}
void characteristic_sum(std::span<const double> energy, std::span<const double> weight, std::span<const double> tau,
                        std::span<cplx> out);

}  // namespace serial

namespace parallel {

void synthesize_modes(std::span<const double> x, const ModeSet& modes, std::span<const cplx> amp,
                      std::span<cplx> out);
void synthesize_extended(const ExtendedSynthesis& table, std::span<const double> times, double log_shift,
                         std::span<cplx> out);
void apply_real_table(std::span<const double> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                      std::size_t batches, std::span<cplx> out);
void apply_complex_table(std::span<const cplx> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                         std::size_t batches, std::span<cplx> out);
/// FFT per row; q must be >= samples.
void fold_power(std::span<const cplx> x, std::size_t rows, std::size_t samples, std::span<const cplx> c,
                std::size_t q, std::span<double> acc);
void characteristic_sum(std::span<const double> energy, std::span<const double> weight, std::span<const double> tau,
                        std::span<cplx> out);

}  // namespace parallel

/// Sets the OpenMP thread count; values < 1 leave the runtime default.
void set_thread_count(int threads);
int thread_count();

}  // namespace superosc::kernels
