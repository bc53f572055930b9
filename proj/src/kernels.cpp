#include "superosc/kernels.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace superosc::kernels {

namespace {

// One mode-sum at one time, all points. cos/sin of E_m t are formed once per mode.
void extended_row(const ExtendedSynthesis& table, double t, double log_shift, cplx* out) {
  const std::size_t nm = table.amplitude.size();
  const mpfr_prec_t bits = table.bits;
  std::vector<ExtFloat> re_coef;
  std::vector<ExtFloat> im_coef;
  re_coef.reserve(nm);
  im_coef.reserve(nm);
  const ExtFloat te(t, bits);
  for (std::size_t m = 0; m < nm; ++m) {
    ExtFloat phase = table.energy[m] * te;
    auto [s, c] = phase.sin_cos();
    c *= table.amplitude[m];
    s *= table.amplitude[m];
    re_coef.push_back(std::move(c));
    im_coef.push_back(-s);
  }
  ExtFloat re(bits);
  ExtFloat im(bits);
  for (std::size_t p = 0; p < table.points; ++p) {
    mpfr_set_zero(re.raw(), 1);
    mpfr_set_zero(im.raw(), 1);
    for (std::size_t m = 0; m < nm; ++m) {
      const ExtFloat& b = table.basis[m * table.points + p];
      re.fma_add(re_coef[m], b);
      im.fma_add(im_coef[m], b);
    }
    out[p] = {re.scaled_to_double(log_shift), im.scaled_to_double(log_shift)};
  }
}

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

namespace serial {

void synthesize_modes(std::span<const double> x, const ModeSet& modes, std::span<const cplx> amp,
                      std::span<cplx> out) {
  for (std::size_t p = 0; p < x.size(); ++p) {
    cplx sum = 0.0;
    for (std::size_t m = 0; m < modes.index.size(); ++m)
      sum += amp[m] * box_mode_value(modes.index[m], modes.wavenumber[m], x[p], modes.inv_sqrt_h);
    out[p] = sum;
  }
}

void synthesize_extended(const ExtendedSynthesis& table, std::span<const double> times, double log_shift,
                         std::span<cplx> out) {
  for (std::size_t s = 0; s < times.size(); ++s) extended_row(table, times[s], log_shift, &out[s * table.points]);
}

void apply_real_table(std::span<const double> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                      std::size_t batches, std::span<cplx> out) {
  for (std::size_t s = 0; s < batches; ++s)
    for (std::size_t r = 0; r < rows; ++r) {
      cplx sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) sum += table[r * cols + c] * v[s * cols + c];
      out[s * rows + r] = sum;
    }
}

void apply_complex_table(std::span<const cplx> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                         std::size_t batches, std::span<cplx> out) {
  for (std::size_t s = 0; s < batches; ++s)
    for (std::size_t r = 0; r < rows; ++r) {
      cplx sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) sum += table[r * cols + c] * v[s * cols + c];
      out[s * rows + r] = sum;
    }
}

void fold_power(std::span<const cplx> x, std::size_t rows, std::size_t samples, std::span<const cplx> c,
                std::size_t q, std::span<double> acc) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < q; ++j) {
      cplx sum = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        const double ang = two_pi * static_cast<double>((j * s) % q) / static_cast<double>(q);
        sum += c[s] * x[r * samples + s] * std::polar(1.0, ang);
      }
      acc[j] += std::norm(sum);
    }
}

void characteristic_sum(std::span<const double> energy, std::span<const double> weight, std::span<const double> tau,
                        std::span<cplx> out) {
  for (std::size_t t = 0; t < tau.size(); ++t) {
    cplx sum = 0.0;
    for (std::size_t j = 0; j < energy.size(); ++j) sum += weight[j] * std::polar(1.0, energy[j] * tau[t]);
    out[t] = sum;
  }
}

}  // namespace serial

namespace parallel {

void synthesize_modes(std::span<const double> x, const ModeSet& modes, std::span<const cplx> amp,
                      std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    cplx sum = 0.0;
    for (std::size_t m = 0; m < modes.index.size(); ++m)
      sum += amp[m] * box_mode_value(modes.index[m], modes.wavenumber[m], x[p], modes.inv_sqrt_h);
    out[p] = sum;
  }
}

void synthesize_extended(const ExtendedSynthesis& table, std::span<const double> times, double log_shift,
                         std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < n; ++s) extended_row(table, times[s], log_shift, &out[s * table.points]);
}

void apply_real_table(std::span<const double> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                      std::size_t batches, std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(batches * rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const std::size_t s = static_cast<std::size_t>(idx) / rows;
    const std::size_t r = static_cast<std::size_t>(idx) % rows;
    const double* row = &table[r * cols];
    const cplx* vec = &v[s * cols];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      re += row[c] * vec[c].real();
      im += row[c] * vec[c].imag();
    }
    out[static_cast<std::size_t>(idx)] = {re, im};
  }
}

void apply_complex_table(std::span<const cplx> table, std::size_t rows, std::size_t cols, std::span<const cplx> v,
                         std::size_t batches, std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(batches * rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const std::size_t s = static_cast<std::size_t>(idx) / rows;
    const std::size_t r = static_cast<std::size_t>(idx) % rows;
    const cplx* row = &table[r * cols];
    const cplx* vec = &v[s * cols];
    cplx sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += row[c] * vec[c];
    out[static_cast<std::size_t>(idx)] = sum;
  }
}

void fold_power(std::span<const cplx> x, std::size_t rows, std::size_t samples, std::span<const cplx> c,
                std::size_t q, std::span<double> acc) {
  if (q < samples) throw std::invalid_argument("fold_power: transform length shorter than the sample count");
  fftw_plan plan = nullptr;
  fftw_complex* probe = nullptr;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    probe = fftw_alloc_complex(q);
    plan = fftw_plan_dft_1d(static_cast<int>(q), probe, probe, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  const int nthreads = omp_get_max_threads();
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(nthreads), std::vector<double>(q, 0.0));
  const auto nrows = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel num_threads(nthreads)
  {
    const int tid = omp_get_thread_num();
    auto* buf = fftw_alloc_complex(q);
    auto& mine = partial[static_cast<std::size_t>(tid)];
#pragma omp for schedule(static)
    for (std::ptrdiff_t r = 0; r < nrows; ++r) {
      for (std::size_t s = 0; s < q; ++s) {
        cplx v = s < samples ? c[s] * x[static_cast<std::size_t>(r) * samples + s] : cplx(0.0);
        buf[s][0] = v.real();
        buf[s][1] = v.imag();
      }
      fftw_execute_dft(plan, buf, buf);
      for (std::size_t j = 0; j < q; ++j) mine[j] += buf[j][0] * buf[j][0] + buf[j][1] * buf[j][1];
    }
    fftw_free(buf);
  }
  for (const auto& part : partial)
    for (std::size_t j = 0; j < q; ++j) acc[j] += part[j];
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(plan);
  fftw_free(probe);
}

void characteristic_sum(std::span<const double> energy, std::span<const double> weight, std::span<const double> tau,
                        std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(tau.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    cplx sum = 0.0;
    for (std::size_t j = 0; j < energy.size(); ++j) sum += weight[j] * std::polar(1.0, energy[j] * tau[t]);
    out[t] = sum;
  }
}

}  // namespace parallel

void set_thread_count(int threads) {
  if (threads >= 1) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace superosc::kernels
