#include <doctest.h>

#include <cmath>

#include "superosc/energy_statistics.hpp"

using namespace superosc;

namespace {

struct WeakRun {
  SuperoscSpec spec{25, 2.0, 1.0};
  BoxEigenbasis basis = make_box_basis(spec, M_PI / 8.0);
  double dtau = std::min(M_PI / 16.0, 2.0 * M_PI / (1.5 * 0.5 * std::pow(M_PI / basis.grid_spacing(), 2)));
  BoxState psi = embed_box_state(build_box_state(spec), basis);
  OpenerPacket op = make_opener(OpenerShape::bump, 5.0, dtau);

  JointBranches run(double window, const BoxState& s) const {
    JointOptions o;
    o.duration = 5.0;
    o.reference_wavenumber = 2.0;
    return exact_joint_evolution(s, op, ReleaseWindow{window}, o);
  }
};

EnergyDistribution discrete(std::vector<double> e, std::vector<double> p) {
  EnergyDistribution d;
  d.energy = std::move(e);
  d.probability = std::move(p);
  return d;
}

}  // namespace

TEST_CASE("point mass moments") {
  const auto m = moments(point_mass(1.5), 3);
  CHECK(m.value[0] == doctest::Approx(1.5));
  CHECK(m.value[1] == doctest::Approx(2.25));
  CHECK(m.value[2] == doctest::Approx(3.375));
  CHECK_FALSE(m.heavy_tail);
}

TEST_CASE("heavy tail warning") {
  const auto m = moments(discrete({0.0, 0.1, 1.0}, {0.5, 0.45, 0.05}), 3);
  CHECK(m.heavy_tail);
  CHECK_FALSE(m.warning.empty());
}

TEST_CASE("convolution of point masses") {
  const auto a = discrete({0.0}, {1.0});
  const auto b = discrete({0.5, 2.0}, {0.25, 0.75});
  const auto id = convolve(a, b);
  CHECK(l1_distance(id, b) <= 1e-15);
  const auto s = convolve(point_mass(1.0), point_mass(2.5));
  REQUIRE(s.energy.size() == 1);
  CHECK(s.energy[0] == doctest::Approx(3.5));
  CHECK(s.probability[0] == 1.0);
}

TEST_CASE("discrete with gridded convolution keeps the mass") {
  EnergyDistribution g;
  g.kind = DistributionKind::gridded;
  g.e_min = -1.0;
  g.de = 0.01;
  for (int j = 0; j < 201; ++j) g.density.push_back(std::exp(-std::pow(-1.0 + 0.01 * j, 2) * 20.0));
  double m = g.total_mass();
  for (auto& v : g.density) v /= m;
  const auto c = convolve(discrete({0.3, 0.7}, {0.4, 0.6}), g);
  CHECK(c.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_FALSE(c.resampled);
  const auto r = convolve(discrete({0.3, 0.3051}, {0.5, 0.5}), g);
  CHECK(r.resampled);
}

TEST_CASE("binning preserves mass") {
  const auto d = discrete({0.01, 0.2, 0.49, 3.0}, {0.1, 0.2, 0.3, 0.4});
  const auto b = bin_distribution(d, 0.0, 0.05, 20);
  CHECK(b.total_mass() == doctest::Approx(1.0));
  CHECK(b.outside_mass == doctest::Approx(0.4));
  CHECK(b.mass_above(0.5) == 0.0);
}

TEST_CASE("characteristic function routes") {
  const auto basis = make_box_basis({6, 2.0, 1.0}, 0.3);
  BoxState s;
  s.basis = basis;
  s.amplitudes.assign(static_cast<std::size_t>(basis.mode_count), 0.0);
  s.amplitudes[2] = {0.6, 0.0};
  s.amplitudes[7] = {0.0, 0.8};
  const auto tau = symmetric_tau_grid(20.0, 0.25);
  const auto a = characteristic_function(photon_energy_distribution(s), tau);
  const auto b0 = characteristic_function(s, 0.0, tau);
  const auto b3 = characteristic_function(s, 3.0, tau);
  double d = 0.0, dt = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    d = std::max(d, std::abs(a.value[i] - b0.value[i]));
    dt = std::max(dt, std::abs(b3.value[i] - b0.value[i]));
  }
  CHECK(d <= 1e-8);
  CHECK(dt <= 1e-10);
  CHECK(check_axioms(a).ok());
  CHECK(std::abs(modular_energy_average(s, 1.25) - a.value[static_cast<std::size_t>(std::lround(20.0 / 0.25 + 1.25 / 0.25))]) <= 1e-14);

  // eigenstate
  const double e0 = basis.energy(5);
  const auto eig = characteristic_function(point_mass(e0), {0.7});
  CHECK(std::abs(eig.value[0] - std::polar(1.0, e0 * 0.7)) <= 1e-15);

  CharacteristicSeries bad{{-1.0, 0.0, 1.0}, {{0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}}};
  CHECK_FALSE(check_axioms(bad).ok());
}

TEST_CASE("opener autocorrelation") {
  const auto hat = make_opener(OpenerShape::top_hat, 8.0, 0.05);
  CHECK(opener_autocorrelation(hat, 0.0).real() == doctest::Approx(1.0));
  CHECK(opener_autocorrelation(hat, 4.0).real() == doctest::Approx(0.5));
  CHECK(std::abs(opener_autocorrelation(hat, 8.5)) == 0.0);
  const auto bump = make_opener(OpenerShape::bump, 8.0, 0.05);
  CHECK(opener_autocorrelation(bump, 0.0).real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(opener_autocorrelation(bump, 8.0001)) <= 1e-12);
  CHECK(opener_lattice_autocorrelation(bump, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(opener_lattice_autocorrelation(bump, 161).real() == 0.0);
  CHECK(modular_energy_average(opener_energy_distribution(bump, 2048), 9.0 * 0.05 * 20).real() <= 1e-12);
}

TEST_CASE("sampled opener density approaches sinc^2") {
  const double T = 5.0;
  const auto hat = make_opener(OpenerShape::top_hat, T, 0.01);
  const std::size_t q = energy_grid_points(hat, 0.01);
  const auto d = opener_energy_distribution(hat, q);
  CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  const auto c = opener_continuous_distribution(hat, d.e_min, d.de, q);
  CHECK(l1_distance(d, c) <= 1e-2);
}

TEST_CASE("weak preset conservation") {
  const WeakRun w;
  const auto jb = w.run(5.0, w.psi);
  ConservationInputs in;
  in.branches = &jb;
  in.alpha = 2.0;
  in.tau_max = 20.0;
  const auto rep = verify_conservation(in);
  CHECK(rep.l1_total <= 1e-6);
  CHECK(rep.fourier_residual <= 1e-6);
  CHECK(rep.confinement_pass);
  CHECK(rep.catalyst_pass);
  CHECK(rep.moments_pass);
  CHECK(rep.unitarity_error <= 1e-8);
  CHECK(rep.total_mass_initial == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.to_text().find("pass_all: true") != std::string::npos);
}

TEST_CASE("resolved photon change equals the direct difference when it is resolvable") {
  const WeakRun w;
  // the sine state releases 6% so plain doubles resolve the change
  const auto s = embed_sine_state(2.0, w.basis);
  const auto jb = w.run(5.0, s);
  const PhotonChange pc(jb);
  const auto before = photon_energy_distribution(jb.initial);
  const auto after = photon_energy_distribution(jb);
  const auto mb = moments(before, 3);
  const auto ma = moments(after, 3);
  for (int n = 1; n <= 3; ++n)
    CHECK(pc.delta_moment(n) * std::exp(pc.log_scale()) ==
          doctest::Approx(ma.value[static_cast<std::size_t>(n - 1)] - mb.value[static_cast<std::size_t>(n - 1)]).epsilon(1e-8));
  const std::vector<double> tau{0.0, 1.3, 7.7};
  const auto cb = characteristic_function(before, tau);
  const auto ca = characteristic_function(after, tau);
  for (std::size_t i = 0; i < tau.size(); ++i)
    CHECK(std::abs(pc.delta_characteristic(tau[i]) * std::exp(pc.log_scale()) - (ca.value[i] - cb.value[i])) <= 1e-12);
  // psi: extended path, lattice recurrence equals direct evaluation
  const auto jp = w.run(5.0, w.psi);
  const PhotonChange pp(jp);
  const auto lat = pp.delta_characteristic_lattice(jp.opener.dtau, 200);
  for (std::size_t j : {0u, 63u, 64u, 65u, 199u}) {
    const cplx direct = pp.delta_characteristic(static_cast<double>(j) * jp.opener.dtau);
    CHECK(std::abs(lat[j] - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("initial total energy is the convolution of the parts") {
  const WeakRun w;
  const auto jb = w.run(5.0, w.psi);
  const std::size_t q = energy_grid_points(jb.opener, 0.01);
  const double e_min = -jb.opener.dtau;  // any start works on one period
  const auto total = total_energy_initial(jb, e_min, q);
  const auto parts = convolve(photon_energy_distribution(jb.initial), opener_energy_distribution(jb.opener, q));
  CHECK(l1_distance(total, parts) <= 1e-3);
  const auto fin = total_energy_final(jb, e_min, q);
  CHECK(l1_distance(total, fin) <= 1e-6);
}

TEST_CASE("no-interaction control run changes nothing") {
  const WeakRun w;
  const auto jb = w.run(0.0, w.psi);
  ConservationInputs in;
  in.branches = &jb;
  in.alpha = 2.0;
  in.tau_max = 20.0;
  const auto rep = verify_conservation(in);
  CHECK(rep.l1_total <= 1e-10);
  CHECK(rep.max_photon_change <= 1e-10);
  CHECK(rep.unitarity_error <= 1e-10);
  CHECK(l1_distance(photon_energy_distribution(jb.initial), photon_energy_distribution(jb)) <= 1e-10);
  const std::size_t q = energy_grid_points(jb.opener, 0.05);
  CHECK(total_variation(opener_energy_distribution(jb.opener, q), opener_energy_distribution(jb, q, BranchSelect::both)) <= 1e-10);
}
