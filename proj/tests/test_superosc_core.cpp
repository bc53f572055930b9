#include <doctest.h>

#include <cmath>
#include <sstream>

#include "superosc/errors.hpp"
#include "superosc/superosc_core.hpp"

using namespace superosc;

TEST_CASE("coefficients for N=2, alpha=3") {
  const auto c = binomial_coefficients({2, 3.0, 1.0});
  REQUIRE(c.size() == 3);
  CHECK(c[0].coefficient == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c[1].coefficient == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(c[2].coefficient == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(c[0].wavenumber == -1.0);
  CHECK(c[1].wavenumber == 0.0);
  CHECK(c[2].wavenumber == 1.0);
}

TEST_CASE("coefficients sum to f(0) = 1 and match the exact MPFR values") {
  const SuperoscSpec spec{40, 4.0, 1.0};
  const auto c = binomial_coefficients(spec);
  const auto e = binomial_coefficients_extended(spec, 256);
  ExtFloat sum(256);
  for (const auto& x : e) sum += x;
  CHECK(sum.to_double() == doctest::Approx(1.0).epsilon(1e-30));
  for (std::size_t n = 0; n < c.size(); ++n) CHECK(c[n].coefficient == doctest::Approx(e[n].to_double()).epsilon(1e-12));
}

TEST_CASE("alpha = 1 leaves a single plane wave") {
  const auto c = binomial_coefficients({7, 1.0, 1.0});
  for (int n = 0; n < 7; ++n) CHECK(c[static_cast<std::size_t>(n)].coefficient == 0.0);
  CHECK(c[7].coefficient == doctest::Approx(1.0));
}

TEST_CASE("product form equals the Fourier sum") {
  const SuperoscSpec small{10, 2.0, 1.0};
  for (double x : {-20.0, -3.3, 0.0, 0.7, 11.0, 31.0}) {
    const cplx a = eval_f(small, x);
    const cplx b = eval_f_sum(small, x);
    CHECK(std::abs(a - b) <= 1e-11 * std::max(1.0, std::abs(a)));
  }
  const SuperoscSpec big{100, 4.0, 1.0};
  for (double x : {-0.9, 0.1, 0.5}) {
    const cplx a = eval_f(big, x);
    const cplx b = eval_f_sum(big, x, 400);
    CHECK(std::abs(a - b) <= 1e-10);
  }
}

TEST_CASE("superoscillation near the origin") {
  const SuperoscSpec spec{100, 4.0, 1.0};
  CHECK(local_wavenumber(spec, 0.0) == doctest::Approx(4.0).epsilon(1e-12));
  const auto r = superosc_region_report(spec, 1.0);
  CHECK(r.max_deviation <= 0.15);
  CHECK(r.wavenumber_min >= 0.98 * 4.0);
  CHECK(r.wavenumber_max <= 1.02 * 4.0);
  const auto r400 = superosc_region_report({400, 4.0, 1.0}, 1.0);
  CHECK(r400.max_deviation <= 0.04);
}

TEST_CASE("peak modulus is alpha^N") {
  const SuperoscSpec spec{30, 3.0, 1.0};
  CHECK(log_max_abs_f(spec) == doctest::Approx(30.0 * std::log(3.0)).epsilon(1e-6));
  const auto [lm, arg] = eval_log_f(spec, 0.5 * M_PI * 30.0);
  CHECK(lm == doctest::Approx(30.0 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("psi is odd, vanishes at the walls and is normalized") {
  const auto st = build_box_state({25, 2.0, 1.0});
  const double h = st.spec.half_length();
  CHECK(eval_psi(st, 0.0) == 0.0);
  CHECK(eval_psi(st, h) == 0.0);
  CHECK(std::abs(eval_psi(st, -h)) <= 1e-12);
  for (double x : {0.3, 2.0, 17.0, 60.0}) CHECK(eval_psi(st, -x) == doctest::Approx(-eval_psi(st, x)).epsilon(1e-12));
  CHECK(st.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  // sum of sine modes agrees away from the cancelling centre
  for (double x : {20.0, 45.0, 70.0}) CHECK(eval_psi_modes(st, x) == doctest::Approx(eval_psi(st, x)).epsilon(1e-9));
}

TEST_CASE("guards") {
  CHECK_THROWS_AS(SuperoscSpec({0, 4.0, 1.0}).validate(), ParameterRangeError);
  CHECK_THROWS_AS(SuperoscSpec({10, -1.0, 1.0}).validate(), ParameterRangeError);
  CHECK_THROWS_AS(SuperoscSpec({1000, 4.0, 1.0}).validate(), ParameterRangeError);
  CHECK_NOTHROW(SuperoscSpec({400, 4.0, 1.0}).validate());
  CHECK_THROWS_AS(eval_f({10, 2.0, 1.0}, 40.0), DomainError);
}

TEST_CASE("mode table csv") {
  std::ostringstream os;
  write_mode_table_csv(os, binomial_coefficients({2, 3.0, 1.0}));
  const std::string s = os.str();
  CHECK(s.rfind("n,k_n,c_n\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}
