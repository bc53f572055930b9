#include <doctest.h>

#include <cmath>

#include "superosc/energy_statistics.hpp"
#include "superosc/errors.hpp"

using namespace superosc;

namespace {

struct Weak {
  SuperoscSpec spec{25, 2.0, 1.0};
  BoxEigenbasis basis = make_box_basis(spec, M_PI / 8.0);
  double dtau = std::min(M_PI / 16.0, 2.0 * M_PI / (1.5 * 0.5 * std::pow(M_PI / basis.grid_spacing(), 2)));
  JointOptions options() const {
    JointOptions o;
    o.duration = 5.0;
    o.reference_wavenumber = 2.0;
    return o;
  }
};

}  // namespace

TEST_CASE("opener packets are normalized") {
  for (auto shape : {OpenerShape::top_hat, OpenerShape::bump}) {
    const auto op = make_opener(shape, 10.0, 0.03);
    CHECK(op.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(op.dtau <= 0.03);
    CHECK(op.tau.back() == doctest::Approx(10.0));
  }
  const auto delta = make_opener(OpenerShape::bump, 0.0, 0.05);
  REQUIRE(delta.size() == 1);
  CHECK(delta.values[0] == doctest::Approx(1.0 / std::sqrt(0.05)));
  CHECK(make_opener(OpenerShape::none, 10.0, 0.05).size() == 0);
  CHECK(parse_opener_shape("top_hat") == OpenerShape::top_hat);
  CHECK_THROWS_AS(parse_opener_shape("gauss"), ConfigError);
}

TEST_CASE("top-hat transform is a sinc") {
  const double T = 4.0;
  const auto op = make_opener(OpenerShape::top_hat, T, 0.01);
  for (double p : {0.0, 0.3, 1.1, 2.9}) {
    const double x = p * T / 2.0;
    const double sinc2 = x == 0.0 ? 1.0 : std::pow(std::sin(x) / x, 2);
    CHECK(op.continuous_density(p) == doctest::Approx(T / (2.0 * M_PI) * sinc2).epsilon(1e-12));
    // sampled transform: geometric sum with halved end weights, close to the continuous density
    const double d = op.dtau;
    const auto n = static_cast<double>(op.size() - 1);
    const cplx z = std::polar(1.0, p * d);
    const cplx geo = p == 0.0 ? cplx(n + 1.0) : (std::pow(z, n + 1.0) - 1.0) / (z - 1.0);
    const cplx sum = d / std::sqrt(T) * (geo - (1.0 - 1.0 / std::sqrt(2.0)) * (1.0 + std::pow(z, n)));
    CHECK(std::norm(op.sampled_transform(p)) == doctest::Approx(std::norm(sum) / (2.0 * M_PI)).epsilon(1e-10));
    CHECK(std::norm(op.sampled_transform(p)) == doctest::Approx(T / (2.0 * M_PI) * sinc2).epsilon(1e-2));
  }
}

TEST_CASE("bump density integrates to one") {
  const auto op = make_opener(OpenerShape::bump, 6.0, 0.02);
  double s = 0.0;
  const double dp = 0.01;
  for (int j = -6000; j <= 6000; ++j) s += op.continuous_density(j * dp) * dp;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("translation only changes the phase of the transform") {
  auto op = make_opener(OpenerShape::bump, 5.0, 0.05);
  auto shifted = op;
  for (auto& t : shifted.tau) t += 1.7;
  for (double p : {-3.0, 0.0, 0.4, 2.2}) CHECK(std::abs(shifted.sampled_transform(p)) == doctest::Approx(std::abs(op.sampled_transform(p))).epsilon(1e-12));
}

TEST_CASE("truncated wave-train spectrum") {
  const double a = 4.0, L = 10.0;
  CHECK(std::abs(truncated_spectrum(a, L, 0.0)) <= 1e-15);
  for (double k : {0.5, 3.9, 4.0, 7.0}) CHECK(std::abs(truncated_spectrum(a, L, -k) + truncated_spectrum(a, L, k)) <= 1e-13);
  // |h(alpha)| = L (1 - sin(2 alpha L) / (2 alpha L))
  CHECK(std::abs(truncated_spectrum(a, L, a)) == doctest::Approx(L * (1.0 - std::sin(2.0 * a * L) / (2.0 * a * L))).epsilon(1e-13));
}

TEST_CASE("spin flip splits the norm") {
  GridWavefunction wf;
  wf.x_min = -5.0;
  wf.dx = 0.1;
  for (int i = 0; i <= 100; ++i) wf.values.push_back(std::polar(1.0, 0.3 * i) * (1.0 + 0.01 * i));
  const auto [rel, trap] = spin_flip_window(wf, ReleaseWindow{2.0});
  for (std::size_t i = 0; i < wf.values.size(); ++i) {
    CHECK(std::norm(rel.values[i]) + std::norm(trap.values[i]) == doctest::Approx(std::norm(wf.values[i])));
    if (std::abs(wf.x(i)) > 2.0 + 1e-9) CHECK(rel.values[i] == cplx(0.0));
  }
}

TEST_CASE("sine release probability equals the discrete window mass") {
  const Weak w;
  const auto s = embed_sine_state(2.0, w.basis);
  const auto op = make_opener(OpenerShape::bump, 5.0, w.dtau);
  const auto jb = exact_joint_evolution(s, op, ReleaseWindow{5.0}, w.options());
  double mass = 0.0;
  for (int i = 1; i <= w.basis.mode_count; ++i) {
    const double x = w.basis.grid_point(i);
    if (std::abs(x) <= 5.0 * (1.0 + 1e-12)) mass += w.basis.grid_spacing() * std::pow(w.basis.mode_value(100, x), 2);
  }
  CHECK(jb.p_released == doctest::Approx(mass).epsilon(1e-12));
  CHECK(jb.p_trapped + jb.p_released == doctest::Approx(1.0).epsilon(1e-13));
  // released spectrum peaks at |k| = alpha and matches the truncated wave-train
  const auto d = jb.released_momentum_density();
  std::size_t jm = 0;
  for (std::size_t j = 0; j < d.size(); ++j)
    if (d[j] > d[jm]) jm = j;
  CHECK(std::abs(std::abs(jb.k[jm]) - 2.0) <= jb.dk);
  CHECK(branch_fidelity(approx_released_state(2.0, jb), released_branch(jb)) >= 0.98);
}

TEST_CASE("psi run at the weak preset is unitary") {
  const Weak w;
  const auto psi = embed_box_state(build_box_state(w.spec), w.basis);
  const auto op = make_opener(OpenerShape::bump, 5.0, w.dtau);
  const auto jb = exact_joint_evolution(psi, op, ReleaseWindow{5.0}, w.options());
  CHECK(std::abs(jb.p_trapped + jb.p_released - 1.0) <= 1e-12);
  CHECK(jb.log_p_released / std::log(10.0) == doctest::Approx(-12.95).epsilon(0.01));
  double trapped = 0.0;
  for (std::size_t s = 0; s < jb.tau_count(); ++s) {
    const auto b = jb.trapped_after_kick(s);
    double n = 0.0;
    for (const auto& v : b) n += std::norm(v);
    trapped += jb.opener.weight(s) * n;
  }
  CHECK(trapped == doctest::Approx(jb.p_trapped).epsilon(1e-13));
}

TEST_CASE("no opener and no window release nothing") {
  const Weak w;
  const auto psi = embed_box_state(build_box_state(w.spec), w.basis);
  const auto none = exact_joint_evolution(psi, make_opener(OpenerShape::none, 5.0, w.dtau), ReleaseWindow{5.0}, w.options());
  CHECK(none.p_released == 0.0);
  const auto closed = exact_joint_evolution(psi, make_opener(OpenerShape::bump, 5.0, w.dtau), ReleaseWindow{0.0}, w.options());
  CHECK(closed.p_released == 0.0);
  CHECK(closed.p_trapped == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tau grid guard") {
  const Weak w;
  const auto s = embed_sine_state(2.0, w.basis);
  const auto coarse = make_opener(OpenerShape::bump, 5.0, 0.5);
  CHECK_THROWS_AS(exact_joint_evolution(s, coarse, ReleaseWindow{5.0}, w.options()), ResolutionError);
}
