#pragma once

// Pipeline pieces shared by the CLI, the sweep and the acceptance runner.

#include <string>
#include <vector>

#include "superosc/config.hpp"
#include "superosc/energy_statistics.hpp"

namespace superosc {

struct Scenario {
  ScenarioConfig config;
  SuperoscSpec spec;
  BoxStateSpec state;
  BoxEigenbasis basis;
  BoxState psi;
  BoxState reference;  // sin(alpha x)
  OpenerPacket opener;
  ReleaseWindow window;
  JointOptions options;
};

/// Validates the config and builds every initial object.
Scenario build_scenario(const ScenarioConfig& config);

JointBranches run_branch(const Scenario& sc, const BoxState& initial);

struct SpectrumStats {
  double peak_k = 0.0;           // |k| of the largest density sample
  double modal_energy = 0.0;     // centre of the modal bin of the released energy histogram
  double modal_bin_low = 0.0;
  double modal_bin_high = 0.0;
  double band_fraction = 0.0;    // mass with ||k| - alpha| <= 2 pi / L
  double width = 0.0;            // rms of |k| - alpha
};

SpectrumStats released_spectrum_stats(const JointBranches& jb, double alpha, double half_width, double energy_step);

/// TV between the initial opener energy distribution and the release-conditional one.
double opener_release_tv(const JointBranches& jb, double energy_step);

struct ReleaseComparison {
  JointBranches psi;
  JointBranches sine;
  double fidelity_fake_true = 0.0;
  double approx_overlap_psi = 0.0;
  double approx_overlap_sine = 0.0;
  SpectrumStats psi_stats;
  SpectrumStats sine_stats;
  double opener_tv_psi = 0.0;
  double opener_tv_sine = 0.0;
};

ReleaseComparison compare_release(const Scenario& sc);

ConservationInputs conservation_inputs(const Scenario& sc, const JointBranches& jb);

}  // namespace superosc
