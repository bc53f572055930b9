#include "superosc/scenario.hpp"

#include <cmath>
#include <numbers>

#include "superosc/errors.hpp"

namespace superosc {

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario sc{config, SuperoscSpec{config.n_order, config.alpha, config.unit_length}, {}, {}, {}, {}, {}, {}, {}};
  sc.state = build_box_state(sc.spec);
  sc.basis = make_box_basis(sc.spec, config.effective_dx());
  sc.psi = embed_box_state(sc.state, sc.basis);
  sc.reference = embed_sine_state(config.alpha, sc.basis);
  sc.opener = make_opener(parse_opener_shape(config.opener_shape), config.effective_opener_width(), config.effective_dtau());
  sc.window = ReleaseWindow{config.window_half_width};
  sc.options.duration = config.duration;
  sc.options.reference_wavenumber = config.alpha;
  sc.options.k_padding = config.k_padding;
  return sc;
}

JointBranches run_branch(const Scenario& sc, const BoxState& initial) {
  return exact_joint_evolution(initial, sc.opener, sc.window, sc.options);
}

SpectrumStats released_spectrum_stats(const JointBranches& jb, double alpha, double half_width, double energy_step) {
  SpectrumStats st;
  if (jb.k_count() == 0) return st;
  const auto dens = jb.released_momentum_density();
  double best = -1.0;
  double var = 0.0;
  for (std::size_t j = 0; j < dens.size(); ++j) {
    const double ak = std::abs(jb.k[j]);
    const double w = dens[j] * jb.dk;
    if (dens[j] > best) {
      best = dens[j];
      st.peak_k = ak;
    }
    if (std::abs(ak - alpha) <= 2.0 * std::numbers::pi / half_width) st.band_fraction += w;
    var += w * (ak - alpha) * (ak - alpha);
  }
  st.width = std::sqrt(var);
  const double k_max = std::abs(jb.k.front());
  const auto hist = released_energy_histogram(jb, energy_step, 0.5 * k_max * k_max + energy_step);
  std::size_t jm = 0;
  for (std::size_t j = 1; j < hist.density.size(); ++j)
    if (hist.density[j] > hist.density[jm]) jm = j;
  st.modal_energy = hist.grid_energy(jm);
  st.modal_bin_low = st.modal_energy - 0.5 * hist.de;
  st.modal_bin_high = st.modal_energy + 0.5 * hist.de;
  return st;
}

double opener_release_tv(const JointBranches& jb, double energy_step) {
  const std::size_t q = energy_grid_points(jb.opener, energy_step);
  return total_variation(opener_energy_distribution(jb.opener, q), opener_energy_distribution(jb, q, BranchSelect::released));
}

ReleaseComparison compare_release(const Scenario& sc) {
  ReleaseComparison rc;
  rc.psi = run_branch(sc, sc.psi);
  rc.sine = run_branch(sc, sc.reference);
  const auto bp = released_branch(rc.psi);
  const auto bs = released_branch(rc.sine);
  const auto approx = approx_released_state(sc.config.alpha, rc.sine);
  rc.fidelity_fake_true = branch_fidelity(bp, bs);
  rc.approx_overlap_psi = branch_fidelity(approx, bp);
  rc.approx_overlap_sine = branch_fidelity(approx, bs);
  const double de = sc.config.effective_energy_step();
  rc.psi_stats = released_spectrum_stats(rc.psi, sc.config.alpha, sc.config.window_half_width, de);
  rc.sine_stats = released_spectrum_stats(rc.sine, sc.config.alpha, sc.config.window_half_width, de);
  rc.opener_tv_psi = opener_release_tv(rc.psi, de);
  rc.opener_tv_sine = opener_release_tv(rc.sine, de);
  return rc;
}

ConservationInputs conservation_inputs(const Scenario& sc, const JointBranches& jb) {
  ConservationInputs in;
  in.branches = &jb;
  in.energy_step = sc.config.effective_energy_step();
  in.tau_max = sc.config.tau_max_factor * sc.config.duration;
  in.alpha = sc.config.alpha;
  return in;
}

}  // namespace superosc
