#pragma once

// Infinite square well on [-h, h], h = pi N a. Exact eigenbasis evolution,
// point synthesis (double or MPFR), projection back onto the basis, and
// free-line spectral evolution for released packets.

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "superosc/kernels.hpp"
#include "superosc/superosc_core.hpp"

namespace superosc {

struct BoxEigenbasis {
  double half_length = 0.0;
  int n_order = 1;
  double unit_length = 1.0;
  int mode_count = 0;  // M; also the number of interior grid points

  /// k_m = m / (2 N a)
  [[nodiscard]] double wavenumber(int m) const { return m / (2.0 * n_order * unit_length); }
  [[nodiscard]] double energy(int m) const {
    const double k = wavenumber(m);
    return 0.5 * k * k;
  }
  [[nodiscard]] double grid_spacing() const { return 2.0 * half_length / (mode_count + 1); }
  /// x_i = -h + i dx, i = 1..M
  [[nodiscard]] double grid_point(int i) const { return -half_length + i * grid_spacing(); }
  [[nodiscard]] double mode_value(int m, double x) const;
};

/// Smallest basis whose grid spacing is <= dx_target; M is odd so x = 0 is a grid point.
BoxEigenbasis make_box_basis(const SuperoscSpec& spec, double dx_target);

/// Unnormalized real amplitudes on a few modes, kept in MPFR for sums that cancel.
struct ExtendedModes {
  std::vector<int> index;
  std::vector<ExtFloat> amplitude;  // coefficient of phi_m before dividing by exp(log_norm)
  double log_norm = 0.0;
  mpfr_prec_t synthesis_bits = 128;  // enough for a mode sum
  mpfr_prec_t product_bits = 128;    // enough for bilinear forms in the amplitudes
};

struct BoxState {
  BoxEigenbasis basis;
  std::vector<cplx> amplitudes;  // index m-1
  double elapsed = 0.0;          // time already applied to `amplitudes`
  std::shared_ptr<const ExtendedModes> extended;  // amplitudes at elapsed = 0, if present

  [[nodiscard]] double norm_squared() const;
  [[nodiscard]] int highest_occupied_mode() const;
};

struct GridWavefunction {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<cplx> values;
  double log_scale = 0.0;  // physical value = values[i] * e^{log_scale}

  [[nodiscard]] double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  [[nodiscard]] double x_max() const { return x(values.empty() ? 0 : values.size() - 1); }
  /// sum |v|^2 dx in the scaled units (multiply by e^{2 log_scale} for the physical norm)
  [[nodiscard]] double scaled_norm_squared() const;
};

/// Exact amplitude mapping of the sine modes of psi onto phi_m, m = 2 |2n - N|.
BoxState embed_box_state(const BoxStateSpec& state, const BoxEigenbasis& basis, bool keep_extended = true);

/// Normalized sin(k x) on the box; k must be an even multiple of 1/(2Na).
BoxState embed_sine_state(double wavenumber, const BoxEigenbasis& basis);

BoxState evolve_box(const BoxState& state, double t);

/// Values at x after a further time t, scaled: physical = out * e^{*log_scale}.
/// Uses the MPFR table when the state carries one.
std::vector<cplx> synthesize_scaled(const BoxState& state, std::span<const double> x, double t, double* log_scale);

/// Same as synthesize_scaled for many times at once (row per time).
std::vector<cplx> synthesize_scaled_batch(const BoxState& state, std::span<const double> x,
                                          std::span<const double> times, double* log_scale);

/// Normalized overlap on |x| <= w of the state evolved by t with sin(k x) e^{-i k^2 (elapsed + t) / 2}.
double central_fidelity(const BoxState& state, double t, double window_halfwidth, double target_wavenumber);

GridWavefunction sample_on_grid(const BoxState& state, double x_min, double dx, std::size_t count);

/// The basis grid itself: x_i for i = 1..M.
GridWavefunction sample_on_basis_grid(const BoxState& state);

/// Discrete sine projection; the wavefunction must live on the basis grid.
BoxState project_onto_basis(const GridWavefunction& wf, const BoxEigenbasis& basis);

/// e^{-i k^2 t / 2} in Fourier space; refuses when the packet could wrap around.
GridWavefunction free_evolve(const GridWavefunction& wf, double t);

struct FreeSpreadEstimate {
  double support_min = 0.0;
  double support_max = 0.0;
  double mean_speed = 0.0;
  double speed_spread = 0.0;
};
FreeSpreadEstimate estimate_free_spread(const GridWavefunction& wf);

void write_grid_binary(const std::string& path, const GridWavefunction& wf);
GridWavefunction read_grid_binary(const std::string& path);
void write_grid_csv(std::ostream& os, const GridWavefunction& wf);

}  // namespace superosc
