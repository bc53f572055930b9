// Serial reference vs OpenMP kernel on pipeline-sized inputs.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "superosc/kernels.hpp"

namespace k = superosc::kernels;
using cplx = std::complex<double>;

namespace {

std::vector<cplx> random_complex(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

template <bool Parallel>
void BM_fold_power(benchmark::State& st) {
  const std::size_t rows = static_cast<std::size_t>(st.range(0));
  const std::size_t samples = 307;
  const std::size_t q = 2048;
  const auto x = random_complex(rows * samples, 1);
  const auto c = random_complex(samples, 2);
  std::vector<double> acc(q);
  for (auto _ : st) {
    std::fill(acc.begin(), acc.end(), 0.0);
    if constexpr (Parallel) k::parallel::fold_power(x, rows, samples, c, q, acc);
    else k::serial::fold_power(x, rows, samples, c, q, acc);
    benchmark::DoNotOptimize(acc.data());
  }
}

template <bool Parallel>
void BM_characteristic_sum(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  std::vector<double> e(n), w(n, 1.0 / static_cast<double>(n)), tau(1224);
  for (std::size_t i = 0; i < n; ++i) e[i] = 0.5 * std::pow(static_cast<double>(i) / static_cast<double>(n), 2);
  for (std::size_t j = 0; j < tau.size(); ++j) tau[j] = 0.0327 * static_cast<double>(j);
  std::vector<cplx> out(tau.size());
  for (auto _ : st) {
    if constexpr (Parallel) k::parallel::characteristic_sum(e, w, tau, out);
    else k::serial::characteristic_sum(e, w, tau, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_apply_real_table(benchmark::State& st) {
  const std::size_t rows = 3199;
  const std::size_t cols = 101;
  const std::size_t batches = static_cast<std::size_t>(st.range(0));
  std::vector<double> table(rows * cols);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = std::sin(0.001 * static_cast<double>(i));
  const auto v = random_complex(cols * batches, 3);
  std::vector<cplx> out(rows * batches);
  for (auto _ : st) {
    if constexpr (Parallel) k::parallel::apply_real_table(table, rows, cols, v, batches, out);
    else k::serial::apply_real_table(table, rows, cols, v, batches, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_fold_power<false>)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fold_power<true>)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_characteristic_sum<false>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_characteristic_sum<true>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_real_table<false>)->Arg(32)->Arg(307)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_real_table<true>)->Arg(32)->Arg(307)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
