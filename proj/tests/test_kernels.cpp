#include <doctest.h>

#include <random>

#include "superosc/kernels.hpp"

using namespace superosc;
namespace k = superosc::kernels;
using k::cplx;

namespace {

std::vector<cplx> rnd(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {d(g), d(g)};
  return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("synthesize_modes serial and parallel agree") {
  k::ModeSet modes;
  modes.inv_sqrt_h = 1.0 / std::sqrt(10.0);
  for (int m = 1; m <= 40; ++m) {
    modes.index.push_back(m);
    modes.wavenumber.push_back(m * M_PI / 20.0);
  }
  std::vector<double> x(301);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = -10.0 + 20.0 * static_cast<double>(i) / 300.0;
  const auto amp = rnd(40, 1);
  std::vector<cplx> a(x.size()), b(x.size());
  k::serial::synthesize_modes(x, modes, amp, a);
  for (int threads : {1, 2, 3}) {
    k::set_thread_count(threads);
    k::parallel::synthesize_modes(x, modes, amp, b);
    CHECK(max_diff(a, b) <= 1e-13);
  }
  // walls of the box are nodes
  CHECK(std::abs(a.front()) <= 1e-12);
  CHECK(std::abs(a.back()) <= 1e-12);
}

TEST_CASE("table application serial and parallel agree") {
  const std::size_t rows = 37, cols = 11, batches = 9;
  std::vector<double> table(rows * cols);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = std::cos(0.37 * static_cast<double>(i));
  const auto ct = rnd(rows * cols, 5);
  const auto v = rnd(cols * batches, 2);
  std::vector<cplx> a(rows * batches), b(rows * batches);
  k::serial::apply_real_table(table, rows, cols, v, batches, a);
  k::parallel::apply_real_table(table, rows, cols, v, batches, b);
  CHECK(max_diff(a, b) <= 1e-13);
  k::serial::apply_complex_table(ct, rows, cols, v, batches, a);
  k::parallel::apply_complex_table(ct, rows, cols, v, batches, b);
  CHECK(max_diff(a, b) <= 1e-13);
}

TEST_CASE("fold_power: FFT path equals the direct sum") {
  const std::size_t rows = 13, samples = 29, q = 64;
  const auto x = rnd(rows * samples, 3);
  const auto c = rnd(samples, 4);
  std::vector<double> a(q, 0.5), b(q, 0.5);
  k::serial::fold_power(x, rows, samples, c, q, a);
  for (int threads : {1, 2}) {
    k::set_thread_count(threads);
    std::fill(b.begin(), b.end(), 0.5);
    k::parallel::fold_power(x, rows, samples, c, q, b);
    for (std::size_t j = 0; j < q; ++j) CHECK(b[j] == doctest::Approx(a[j]).epsilon(1e-11));
  }
  // Parseval: mean over j of the folded power is sum |c x|^2
  double mean = 0.0;
  for (std::size_t j = 0; j < q; ++j) mean += (a[j] - 0.5) / static_cast<double>(q);
  double direct = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t s = 0; s < samples; ++s) direct += std::norm(c[s] * x[r * samples + s]);
  CHECK(mean == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("parallel fold_power is bitwise reproducible at a fixed thread count") {
  const auto x = rnd(40 * 50, 8);
  const auto c = rnd(50, 9);
  k::set_thread_count(2);
  std::vector<double> a(128, 0.0), b(128, 0.0);
  k::parallel::fold_power(x, 40, 50, c, 128, a);
  k::parallel::fold_power(x, 40, 50, c, 128, b);
  CHECK(a == b);
}

TEST_CASE("characteristic_sum serial and parallel agree") {
  std::vector<double> e{0.0, 0.25, 1.5, 3.0}, w{0.1, 0.2, 0.3, 0.4}, tau;
  for (int j = -50; j <= 50; ++j) tau.push_back(0.1 * j);
  std::vector<cplx> a(tau.size()), b(tau.size());
  k::serial::characteristic_sum(e, w, tau, a);
  k::parallel::characteristic_sum(e, w, tau, b);
  CHECK(max_diff(a, b) <= 1e-14);
  CHECK(a[50] == cplx(1.0, 0.0));
}

TEST_CASE("extended synthesis serial and parallel agree") {
  k::ExtendedSynthesis t;
  t.bits = 200;
  t.points = 5;
  for (int m = 0; m < 6; ++m) {
    t.amplitude.emplace_back(1.0 + m, 200);
    t.energy.emplace_back(0.01 * m * m, 200);
    for (std::size_t p = 0; p < t.points; ++p) t.basis.emplace_back(std::sin(0.3 * (m + 1) * (p + 1.0)), 200);
  }
  const std::vector<double> times{0.0, 0.5, 2.0};
  std::vector<cplx> a(15), b(15);
  k::serial::synthesize_extended(t, times, 0.0, a);
  k::parallel::synthesize_extended(t, times, 0.0, b);
  CHECK(max_diff(a, b) == 0.0);
  double direct = 0.0;
  for (int m = 0; m < 6; ++m) direct += (1.0 + m) * std::sin(0.3 * (m + 1));
  CHECK(a[0].real() == doctest::Approx(direct).epsilon(1e-14));
}
