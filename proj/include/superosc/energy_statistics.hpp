#pragma once

// Energy distributions of the photon, the opener and their sum, before and
// after the interaction; characteristic functions, moments, and the
// conservation report.

#include <complex>
#include <string>
#include <vector>

#include "superosc/opener_interaction.hpp"

namespace superosc {

enum class DistributionKind { discrete, gridded };

struct EnergyDistribution {
  DistributionKind kind = DistributionKind::discrete;
  std::string label;
  // discrete
  std::vector<double> energy;
  std::vector<double> probability;
  // gridded: density at e_min + j de
  double e_min = 0.0;
  double de = 0.0;
  std::vector<double> density;
  bool periodic = false;   // one period of a lattice-sampled density
  bool resampled = false;  // set when an operation had to interpolate
  double outside_mass = 0.0;

  [[nodiscard]] double total_mass() const;
  [[nodiscard]] double grid_energy(std::size_t j) const { return e_min + static_cast<double>(j) * de; }
  /// Mass strictly above e (discrete) or in grid cells above e (gridded).
  [[nodiscard]] double mass_above(double e) const;
  [[nodiscard]] double max_energy_with_mass(double threshold = 0.0) const;
};

EnergyDistribution point_mass(double e, const std::string& label = "point");

/// Histogram of a discrete distribution on cells [e_min + j de, e_min + (j+1) de).
EnergyDistribution bin_distribution(const EnergyDistribution& d, double e_min, double de, std::size_t cells);

struct CharacteristicSeries {
  std::vector<double> tau;
  std::vector<cplx> value;
};

struct AxiomCheck {
  double unit_error = 0.0;       // |P(0) - 1| (nan when tau = 0 is absent)
  double max_modulus = 0.0;
  double hermitian_error = 0.0;  // max |P(-tau) - conj P(tau)| over mirrored samples
  [[nodiscard]] bool ok(double tol = 1e-10) const;
};
AxiomCheck check_axioms(const CharacteristicSeries& series);

/// Symmetric grid -tau_max..tau_max with the given step (always contains 0).
std::vector<double> symmetric_tau_grid(double tau_max, double step);

// --- photon ---------------------------------------------------------------

/// {E_m, |a_m|^2} over occupied modes.
EnergyDistribution photon_energy_distribution(const BoxState& state);

/// Final photon distribution: trapped levels plus released k samples as point masses at k^2/2.
EnergyDistribution photon_energy_distribution(const JointBranches& jb);

/// Released branch only, normalized, binned on E = k^2 / 2 (mass of each k cell goes to its bin).
EnergyDistribution released_energy_histogram(const JointBranches& jb, double de, double e_max);

// --- opener ---------------------------------------------------------------

/// |phi~(p)|^2 of the sampled packet over one period [-pi/dtau, pi/dtau), q points.
EnergyDistribution opener_energy_distribution(const OpenerPacket& packet, std::size_t q);

enum class BranchSelect { released, trapped, both };

/// Opener momentum marginal after the interaction; `released` is conditional on release.
EnergyDistribution opener_energy_distribution(const JointBranches& jb, std::size_t q, BranchSelect which);

/// Continuous-shape density |phi~(p)|^2 sampled on [p_min, p_min + count dp).
EnergyDistribution opener_continuous_distribution(const OpenerPacket& packet, double p_min, double dp, std::size_t count);

/// <phi(t)|phi(t + tau)> = int phi*(q) phi(q - tau) dq for the continuous shape.
cplx opener_autocorrelation(const OpenerPacket& packet, double tau);

/// Same overlap for the sampled packet at tau = j dtau.
cplx opener_lattice_autocorrelation(const OpenerPacket& packet, long j);

// --- totals ---------------------------------------------------------------

/// Number of transform points for an energy step <= de_max over one lattice period.
std::size_t energy_grid_points(const OpenerPacket& packet, double de_max);

/// sum_m |a_m|^2 |phi~(E - E_m)|^2 on [e_min, e_min + 2 pi / dtau).
EnergyDistribution total_energy_initial(const JointBranches& jb, double e_min, std::size_t q);

/// sum_m |A_m(E)|^2 + sum_k |A_k(E)|^2 dk from the folded branches.
EnergyDistribution total_energy_final(const JointBranches& jb, double e_min, std::size_t q);

double l1_distance(const EnergyDistribution& a, const EnergyDistribution& b);
double total_variation(const EnergyDistribution& a, const EnergyDistribution& b);

/// Independent subsystems: the distribution of E_a + E_b.
EnergyDistribution convolve(const EnergyDistribution& a, const EnergyDistribution& b);

// --- characteristic functions --------------------------------------------

/// int e^{i E tau} P(E) dE
CharacteristicSeries characteristic_function(const EnergyDistribution& d, const std::vector<double>& tau);

/// <Psi(t + tau)|Psi(t)> by evolving the state.
CharacteristicSeries characteristic_function(const BoxState& state, double t, const std::vector<double>& tau);

cplx modular_energy_average(const EnergyDistribution& d, double tau);
cplx modular_energy_average(const BoxState& state, double tau);

// --- moments --------------------------------------------------------------

struct MomentVector {
  std::vector<double> value;  // value[n-1] = <E^n>
  bool heavy_tail = false;
  std::string warning;
};

/// Warns when the top decile of the energy range carries > 10% of the highest moment.
MomentVector moments(const EnergyDistribution& d, int max_order);

// --- resolved photon change ----------------------------------------------

/// Change of the photon distribution caused by the interaction, resolved
/// directly instead of as a difference of two nearly equal distributions.
/// Change of <e^{iH tau}>:
///   e^{2 s} [ -sum_n Y_n e^{i E_n tau} + sum_m Q_m e^{i E_m tau} + sum_k R_k e^{i k^2 tau / 2} ]
/// with s the branch log scale, Y_n from the window Gram matrix (MPFR when the state carries
/// an extended table), Q_m and R_k the folded trapped and released weights.
class PhotonChange {
 public:
  explicit PhotonChange(const JointBranches& jb);

  [[nodiscard]] cplx delta_characteristic(double tau) const;
  /// tau = j step for j = 0..count-1
  [[nodiscard]] std::vector<cplx> delta_characteristic_lattice(double step, std::size_t count) const;
  [[nodiscard]] double delta_moment(int order) const;
  /// Change of the trapped branch alone (unnormalized) for <E^order>.
  [[nodiscard]] double delta_trapped_moment(int order) const;
  [[nodiscard]] double log_scale() const { return 2.0 * branch_log_scale_; }

 private:
  double branch_log_scale_ = 0.0;
  bool extended_ = false;
  mpfr_prec_t bits_ = 53;
  std::vector<int> mode_;            // occupied initial modes
  std::vector<ExtFloat> y_ext_;      // Y_n, extended
  std::vector<ExtFloat> energy_ext_; // E_n, extended
  std::vector<double> y_;            // Y_n, double path
  std::vector<double> mode_energy_;
  std::vector<double> trapped_energy_;
  std::vector<double> trapped_weight_;   // Q_m
  std::vector<double> released_energy_;
  std::vector<double> released_weight_;  // R_k
};

// --- report ---------------------------------------------------------------

struct ConservationInputs {
  const JointBranches* branches = nullptr;
  double energy_step = 0.025;       // target total-energy grid step
  double tau_max = 40.0;            // characteristic series range
  double change_threshold = 1e-3;   // delta
  double opener_threshold = 1e-2;   // delta'
  double l1_tolerance = 1e-6;
  double fourier_tolerance = 1e-6;
  double unitarity_tolerance = 1e-8;
  double alpha = 4.0;
  int max_moment = 3;
};

struct ConservationReport {
  double energy_step = 0.0;
  double l1_total = 0.0;
  double total_mass_initial = 0.0;
  double total_mass_final = 0.0;
  double fourier_residual = 0.0;        // sup |dP~_gamma P~_Omega| on the tau lattice
  double max_photon_change = 0.0;       // sup |dP~_gamma|
  double log10_max_photon_change = 0.0;
  std::size_t changed_points = 0;       // tau with |dP~_gamma| > delta
  std::size_t confinement_violations = 0;
  double max_opener_beyond_support = 0.0;  // sup_{tau > width} |<phi|phi(tau)>|
  double unitarity_error = 0.0;
  double log10_p_released = 0.0;
  std::vector<double> moment_initial;
  std::vector<double> moment_shift;
  std::vector<double> moment_relative_shift;
  std::vector<double> moment_tolerance;
  double modular_change_2t = 0.0;       // |dP~_gamma(2T)|
  double trapped_mean_shift = 0.0;      // conditional trapped <E> minus initial <E>
  bool l1_pass = false;
  bool fourier_pass = false;
  bool confinement_pass = false;
  bool catalyst_pass = false;
  bool unitarity_pass = false;
  bool moments_pass = false;
  std::vector<std::string> notes;

  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] std::string to_text() const;
};

ConservationReport verify_conservation(const ConservationInputs& in);

}  // namespace superosc
