#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "superosc/box_dynamics.hpp"
#include "superosc/errors.hpp"

using namespace superosc;

TEST_CASE("basis grid is orthonormal and centred") {
  const auto basis = make_box_basis({4, 2.0, 1.0}, 0.5);
  CHECK(basis.mode_count % 2 == 1);
  CHECK(basis.grid_point((basis.mode_count + 1) / 2) == doctest::Approx(0.0).scale(1.0));
  CHECK(basis.grid_spacing() <= 0.5);
  for (int m : {1, 2, 7})
    for (int n : {1, 2, 7, 8}) {
      double s = 0.0;
      for (int i = 1; i <= basis.mode_count; ++i)
        s += basis.grid_spacing() * basis.mode_value(m, basis.grid_point(i)) * basis.mode_value(n, basis.grid_point(i));
      CHECK(s == doctest::Approx(m == n ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mode_value equals sin(k (x + h)) / sqrt(h)") {
  const auto basis = make_box_basis({6, 3.0, 1.0}, 0.2);
  const double h = basis.half_length;
  for (int m : {1, 2, 3, 4, 5, 10})
    for (double x : {-7.0, -0.3, 0.0, 4.4})
      CHECK(basis.mode_value(m, x) ==
            doctest::Approx(std::sin(basis.wavenumber(m) * (x + h)) / std::sqrt(h)).scale(1.0).epsilon(1e-12));
}

TEST_CASE("embedded psi is normalized and matches the closed form") {
  for (auto spec : {SuperoscSpec{25, 2.0, 1.0}, SuperoscSpec{100, 4.0, 1.0}}) {
    const auto st = build_box_state(spec);
    const auto basis = make_box_basis(spec, M_PI / (4.0 * spec.alpha));
    const auto bs = embed_box_state(st, basis);
    CHECK(bs.norm_squared() == doctest::Approx(1.0).epsilon(1e-10));
    const std::vector<double> x{-0.8, 0.05, 0.6};
    double ls = 0.0;
    const auto v = synthesize_scaled(bs, x, 0.0, &ls);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(v[i].real() * std::exp(ls) == doctest::Approx(eval_psi(st, x[i])).scale(1e-300).epsilon(1e-9));
  }
}

TEST_CASE("sine reference is an eigenstate") {
  const auto basis = make_box_basis({25, 2.0, 1.0}, M_PI / 8.0);
  const auto s = embed_sine_state(2.0, basis);
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.highest_occupied_mode() == 100);
  const auto e = evolve_box(s, 3.0);
  const cplx expect = s.amplitudes[99] * std::polar(1.0, -2.0 * 3.0);
  CHECK(std::abs(e.amplitudes[99] - expect) <= 1e-14);
  CHECK(e.elapsed == 3.0);
  CHECK(central_fidelity(s, 4.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(embed_sine_state(2.0 + 1.0 / 50.0, basis), RepresentationError);
  CHECK_THROWS_AS(evolve_box(s, -1.0), DomainError);
}

TEST_CASE("sampling and projection round trip") {
  const auto spec = SuperoscSpec{25, 2.0, 1.0};
  const auto basis = make_box_basis(spec, M_PI / 8.0);
  auto bs = evolve_box(embed_box_state(build_box_state(spec), basis, false), 1.7);
  const auto grid = sample_on_basis_grid(bs);
  CHECK(grid.scaled_norm_squared() * std::exp(2.0 * grid.log_scale) == doctest::Approx(1.0).epsilon(1e-12));
  const auto back = project_onto_basis(grid, basis);
  double err = 0.0;
  for (std::size_t m = 0; m < bs.amplitudes.size(); ++m) err = std::max(err, std::abs(back.amplitudes[m] - bs.amplitudes[m]));
  CHECK(err <= 1e-12);
}

TEST_CASE("too coarse sampling grid is refused") {
  const auto basis = make_box_basis({25, 2.0, 1.0}, M_PI / 8.0);
  const auto s = embed_sine_state(2.0, basis);
  CHECK_THROWS_AS(sample_on_grid(s, -10.0, 1.0, 20), ResolutionError);
  CHECK_THROWS_AS(sample_on_grid(s, -100.0, 0.1, 20), DomainError);
}

TEST_CASE("free evolution of a gaussian packet") {
  GridWavefunction wf;
  wf.dx = 0.05;
  wf.x_min = -200.0;
  const std::size_t n = 8001;
  const double sigma = 1.0, k0 = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = wf.x_min + static_cast<double>(i) * wf.dx;
    wf.values.push_back(std::pow(2.0 * M_PI * sigma * sigma, -0.25) * std::exp(-x * x / (4.0 * sigma * sigma)) *
                        std::polar(1.0, k0 * x));
  }
  const double t = 10.0;
  const auto out = free_evolve(wf, t);
  // width sigma_t = sigma sqrt(1 + (t / (2 sigma^2))^2), centre k0 t
  double mean = 0.0, var = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::norm(out.values[i]) * wf.dx;
    norm += p;
    mean += p * out.x(i);
  }
  for (std::size_t i = 0; i < n; ++i) var += std::norm(out.values[i]) * wf.dx * std::pow(out.x(i) - mean, 2);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(k0 * t).epsilon(1e-9));
  CHECK(std::sqrt(var) == doctest::Approx(sigma * std::sqrt(1.0 + std::pow(t / (2.0 * sigma * sigma), 2))).epsilon(1e-9));
  CHECK_THROWS_AS(free_evolve(wf, 500.0), ExtentError);
}

TEST_CASE("grid binary round trip") {
  GridWavefunction wf;
  wf.x_min = -1.5;
  wf.dx = 0.25;
  wf.log_scale = -123.25;
  wf.values = {{1.0, 2.0}, {-3.0, 0.5}, {1e-300, -7.0}};
  const auto path = (std::filesystem::temp_directory_path() / "superosc_grid_test.bin").string();
  write_grid_binary(path, wf);
  const auto back = read_grid_binary(path);
  CHECK(back.x_min == wf.x_min);
  CHECK(back.dx == wf.dx);
  CHECK(back.log_scale == wf.log_scale);
  CHECK(back.values == wf.values);
  std::filesystem::remove(path);
}
