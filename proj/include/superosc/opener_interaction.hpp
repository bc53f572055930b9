#pragma once

// The opener: a clock coordinate q moving rigidly at unit speed. When q passes
// 0 it flips the spin inside |x| <= L, releasing that part of the particle onto
// the free line. The delta(q) interaction is folded over the opener's initial
// position: the component starting at q = -tau is kicked at time tau.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "superosc/box_dynamics.hpp"

namespace superosc {

enum class OpenerShape { top_hat, bump, none };

OpenerShape parse_opener_shape(const std::string& name);
std::string to_string(OpenerShape shape);

struct OpenerPacket {
  OpenerShape shape = OpenerShape::bump;
  double width = 0.0;         // support is q in [-width, 0]
  double dtau = 0.0;
  std::vector<double> tau;    // tau_s = s dtau; the sample sits at q = -tau_s
  std::vector<double> values; // phi(-tau_s), real

  [[nodiscard]] std::size_t size() const { return tau.size(); }
  /// rho_s = dtau |phi(-tau_s)|^2
  [[nodiscard]] double weight(std::size_t s) const { return dtau * values[s] * values[s]; }
  [[nodiscard]] double norm_squared() const;
  /// phi(q) of the continuous shape (unit L2 norm), zero outside [-width, 0].
  [[nodiscard]] double continuous_value(double q) const;
  /// (1/sqrt(2 pi)) sum_s dtau phi_s e^{i p tau_s}: the sampled packet's momentum amplitude.
  [[nodiscard]] cplx sampled_transform(double p) const;
  /// |phi~(p)|^2 of the continuous shape; closed form for the top-hat, quadrature for the bump.
  [[nodiscard]] double continuous_density(double p) const;
};

/// width == 0 gives a single sample at tau = 0 carrying the whole norm.
OpenerPacket make_opener(OpenerShape shape, double width, double dtau_target);

struct ReleaseWindow {
  double half_width = 0.0;

  [[nodiscard]] bool contains(double x) const { return half_width > 0.0 && std::abs(x) <= half_width * (1.0 + 1e-12); }
  /// L <= sqrt(N) a: the window stays inside the superoscillatory region.
  [[nodiscard]] bool inside_superoscillation_region(const SuperoscSpec& spec) const;
};

/// e^{-i (pi/2) g sigma_x}|up> = (1 - g)|up> - i g |down>: returns (released, trapped).
std::pair<GridWavefunction, GridWavefunction> spin_flip_window(const GridWavefunction& wf, const ReleaseWindow& window);

struct JointOptions {
  double duration = 10.0;            // T: final time
  double reference_wavenumber = 0.0; // alpha for the tau-grid phase guard; 0 skips the guard
  int k_padding = 4;                 // released k grid: next power of two >= k_padding * window points
  bool keep_trapped = true;          // keep the per-tau trapped projections P_m
};

/// Post-interaction state. Amplitudes are stored scaled: physical = stored * e^{log_scale}.
struct JointBranches {
  BoxState initial;
  OpenerPacket opener;
  ReleaseWindow window;
  double duration = 0.0;
  double log_scale = 0.0;

  std::vector<int> window_index;     // basis grid indices i (x_i = -h + i dx) inside the window
  std::vector<double> window_x;
  double dx = 0.0;
  std::vector<double> k;             // released momentum grid
  double dk = 0.0;

  std::vector<cplx> window_samples;  // [s][p]: g psi(x_p, tau_s), scaled
  std::vector<cplx> released_k;      // [s][j]: (dx/sqrt(2 pi)) sum_p window_samples e^{-i k_j x_p}
  std::vector<cplx> trapped_kick;    // [s][m-1]: sum_p dx phi_m(x_p) window_samples (if kept)

  double p_trapped = 1.0;
  double p_released = 0.0;
  double log_p_released = -std::numeric_limits<double>::infinity();
  double max_window_mass = 0.0;      // max_s of the window mass, physical
  double log_max_window_mass = -std::numeric_limits<double>::infinity();

  [[nodiscard]] std::size_t tau_count() const { return opener.size(); }
  [[nodiscard]] std::size_t window_count() const { return window_x.size(); }
  [[nodiscard]] std::size_t k_count() const { return k.size(); }
  /// Released amplitude in the (q, k) representation at the final time, scaled:
  /// phi(-tau_s) (-i) r_k(tau_s) e^{-i k^2 (T - tau_s) / 2}
  [[nodiscard]] cplx released_amplitude(std::size_t s, std::size_t j) const;
  /// Trapped amplitudes (physical) after the kick at tau_s, before the remaining box evolution:
  /// a_m e^{-i E_m tau_s} - e^{log_scale} P_m(tau_s)
  [[nodiscard]] std::vector<cplx> trapped_after_kick(std::size_t s) const;
  /// Trapped state at the final time for the opener component that started at q = -tau_s.
  [[nodiscard]] BoxState trapped_state(std::size_t s) const;
  /// Released packet on a padded free-line grid at the final time for sample s (scaled).
  [[nodiscard]] GridWavefunction released_wavefunction(std::size_t s, double extent) const;
  /// Released momentum density conditional on release: sum_s rho_s |r_k|^2 / sum, per unit k.
  [[nodiscard]] std::vector<double> released_momentum_density() const;
};

/// Exact tau-folded evolution: box for tau, kick, then free line / box for T - tau.
JointBranches exact_joint_evolution(const BoxState& state, const OpenerPacket& opener, const ReleaseWindow& window,
                                    const JointOptions& options);

/// h(k) = (1/2i)[2 sin((a-k)L)/(a-k) - 2 sin((a+k)L)/(a+k)]
cplx truncated_spectrum(double alpha, double half_width, double k);

/// Analytic released branch on the same (tau, k) grid as `exact`:
/// phi(q - T) e^{-i a^2 T/2} e^{-i (k^2/2 - a^2/2) q} h(k), evaluated at q = T - tau_s.
std::vector<cplx> approx_released_state(double alpha, const JointBranches& exact);

/// |<a|b>|^2 / (<a|a><b|b>) over the (tau, k) grid with weights dtau dk.
double branch_fidelity(const std::vector<cplx>& a, const std::vector<cplx>& b);

/// Released branch of `exact` laid out like approx_released_state.
std::vector<cplx> released_branch(const JointBranches& exact);

double release_probability(const JointBranches& branches);

}  // namespace superosc
