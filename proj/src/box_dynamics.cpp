#include "superosc/box_dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "superosc/errors.hpp"

namespace superosc {

namespace {

constexpr double kPi = std::numbers::pi;

kernels::ModeSet occupied_modes(const BoxState& state, std::vector<cplx>* amps) {
  kernels::ModeSet set;
  set.inv_sqrt_h = 1.0 / std::sqrt(state.basis.half_length);
  for (int m = 1; m <= state.basis.mode_count; ++m) {
    const cplx a = state.amplitudes[static_cast<std::size_t>(m - 1)];
    if (a == cplx(0.0)) continue;
    set.index.push_back(m);
    set.wavenumber.push_back(state.basis.wavenumber(m));
    amps->push_back(a);
  }
  return set;
}

kernels::ExtendedSynthesis extended_table(const BoxState& state, std::span<const double> x) {
  const ExtendedModes& ext = *state.extended;
  const mpfr_prec_t bits = ext.synthesis_bits;
  kernels::ExtendedSynthesis table;
  table.bits = bits;
  table.points = x.size();
  const ExtFloat two_na(2.0 * state.basis.n_order * state.basis.unit_length, bits);
  ExtFloat h = ExtFloat::pi(bits);
  h *= static_cast<double>(state.basis.n_order) * state.basis.unit_length;
  ExtFloat inv_sqrt_h(1.0, bits);
  inv_sqrt_h /= h.sqrt();
  for (std::size_t j = 0; j < ext.index.size(); ++j) {
    const int m = ext.index[j];
    ExtFloat k(static_cast<double>(m), bits);
    k /= two_na;
    ExtFloat e = k * k;
    e *= 0.5;
    ExtFloat a(bits);
    mpfr_set(a.raw(), ext.amplitude[j].raw(), MPFR_RNDN);
    table.amplitude.push_back(std::move(a));
    table.energy.push_back(std::move(e));
    const double sign = ((m / 2) % 2 == 0) ? 1.0 : -1.0;
    for (double xp : x) {
      ExtFloat arg = k * ExtFloat(xp, bits);
      auto [s, c] = arg.sin_cos();
      ExtFloat v = (m % 2 == 0) ? s : c;
      v *= sign;
      v *= inv_sqrt_h;
      table.basis.push_back(std::move(v));
    }
  }
  return table;
}

}  // namespace

double BoxEigenbasis::mode_value(int m, double x) const {
  return kernels::box_mode_value(m, wavenumber(m), x, 1.0 / std::sqrt(half_length));
}

BoxEigenbasis make_box_basis(const SuperoscSpec& spec, double dx_target) {
  spec.validate();
  if (!(dx_target > 0.0)) throw ResolutionError("grid spacing must be positive");
  BoxEigenbasis b;
  b.n_order = spec.n_order;
  b.unit_length = spec.unit_length;
  b.half_length = spec.half_length();
  const double halves = std::ceil(b.half_length / dx_target - 1e-9);
  b.mode_count = 2 * static_cast<int>(halves) - 1;
  return b;
}

double BoxState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

int BoxState::highest_occupied_mode() const {
  for (int m = static_cast<int>(amplitudes.size()); m >= 1; --m)
    if (amplitudes[static_cast<std::size_t>(m - 1)] != cplx(0.0)) return m;
  return 0;
}

double GridWavefunction::scaled_norm_squared() const {
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  return s * dx;
}

BoxState embed_box_state(const BoxStateSpec& spec_state, const BoxEigenbasis& basis, bool keep_extended) {
  const SuperoscSpec& spec = spec_state.spec;
  if (spec.n_order != basis.n_order || spec.unit_length != basis.unit_length)
    throw RepresentationError("box basis built for a different N or unit length");
  BoxState out;
  out.basis = basis;
  out.amplitudes.assign(static_cast<std::size_t>(basis.mode_count), cplx(0.0));
  const double sqrt_h = std::sqrt(basis.half_length);

  auto ext = std::make_shared<ExtendedModes>();
  double log_max_u = -std::numeric_limits<double>::infinity();
  for (const auto& m : spec_state.sine_modes) {
    // k_n = m / (2 N a)  =>  m = 2 (2n - N)
    const int mode = 2 * (2 * m.index - spec.n_order);
    if (mode < 1 || mode > basis.mode_count)
      throw RepresentationError("sine mode " + std::to_string(m.index) + " does not fit the box basis");
    const double sign = ((mode / 2) % 2 == 0) ? 1.0 : -1.0;
    out.amplitudes[static_cast<std::size_t>(mode - 1)] = sign * sqrt_h * m.amplitude;
    ext->index.push_back(mode);
  }
  if (keep_extended && !spec_state.sine_modes.empty()) {
    for (const auto& m : spec_state.sine_modes)
      if (m.amplitude != 0.0)
        log_max_u = std::max(log_max_u, std::log(std::abs(m.amplitude)) + spec_state.log_norm_constant);
    const double log_count = std::log(static_cast<double>(spec_state.sine_modes.size()));
    const double scale = std::max(0.0, log_max_u + log_count);
    ext->synthesis_bits = precision_for_cancellation(scale);
    ext->product_bits = precision_for_cancellation(2.0 * scale);
    const auto u = unnormalized_sine_amplitudes(spec_state, ext->product_bits);
    ExtFloat h = ExtFloat::pi(ext->product_bits);
    h *= static_cast<double>(spec.n_order) * spec.unit_length;
    const ExtFloat root_h = h.sqrt();
    for (std::size_t j = 0; j < u.size(); ++j) {
      ExtFloat a = u[j] * root_h;
      if ((ext->index[j] / 2) % 2 != 0) a = -a;
      ext->amplitude.push_back(std::move(a));
    }
    // log of the normalization from the exact amplitudes
    ExtFloat norm2(ext->product_bits);
    for (const auto& a : ext->amplitude) norm2.fma_add(a, a);
    ext->log_norm = 0.5 * norm2.log_abs();
    out.extended = std::move(ext);
  }
  return out;
}

BoxState embed_sine_state(double wavenumber, const BoxEigenbasis& basis) {
  const double mreal = wavenumber * 2.0 * basis.n_order * basis.unit_length;
  const double mround = std::round(mreal);
  if (std::abs(mreal - mround) > 1e-9 * std::max(1.0, mreal))
    throw RepresentationError("wavenumber is not a multiple of 1/(2 N a)");
  const int m = static_cast<int>(mround);
  if (m % 2 != 0) throw RepresentationError("sin(kx) is a box eigenfunction only for even m");
  if (m < 1 || m > basis.mode_count) throw RepresentationError("wavenumber above the basis cutoff");
  BoxState out;
  out.basis = basis;
  out.amplitudes.assign(static_cast<std::size_t>(basis.mode_count), cplx(0.0));
  out.amplitudes[static_cast<std::size_t>(m - 1)] = ((m / 2) % 2 == 0) ? 1.0 : -1.0;
  return out;
}

BoxState evolve_box(const BoxState& state, double t) {
  if (t < 0.0) throw DomainError("evolve_box needs t >= 0");
  BoxState out = state;
  for (int m = 1; m <= state.basis.mode_count; ++m) {
    auto& a = out.amplitudes[static_cast<std::size_t>(m - 1)];
    if (a != cplx(0.0)) a *= std::polar(1.0, -state.basis.energy(m) * t);
  }
  out.elapsed = state.elapsed + t;
  return out;
}

std::vector<cplx> synthesize_scaled_batch(const BoxState& state, std::span<const double> x,
                                          std::span<const double> times, double* log_scale) {
  std::vector<cplx> out(x.size() * times.size());
  if (state.extended) {
    const auto table = extended_table(state, x);
    std::vector<double> absolute(times.begin(), times.end());
    for (auto& t : absolute) t += state.elapsed;
    kernels::parallel::synthesize_extended(table, absolute, 0.0, out);
    *log_scale = -state.extended->log_norm;
    return out;
  }
  std::vector<cplx> amps;
  const auto modes = occupied_modes(state, &amps);
  std::vector<cplx> phased(amps.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (std::size_t j = 0; j < amps.size(); ++j)
      phased[j] = amps[j] * std::polar(1.0, -state.basis.energy(modes.index[j]) * times[s]);
    kernels::parallel::synthesize_modes(x, modes, phased, std::span<cplx>(out).subspan(s * x.size(), x.size()));
  }
  *log_scale = 0.0;
  return out;
}

std::vector<cplx> synthesize_scaled(const BoxState& state, std::span<const double> x, double t, double* log_scale) {
  const double times[1] = {t};
  return synthesize_scaled_batch(state, x, times, log_scale);
}

double central_fidelity(const BoxState& state, double t, double window_halfwidth, double target_wavenumber) {
  if (!(window_halfwidth > 0.0) || window_halfwidth > state.basis.half_length)
    throw DomainError("window half-width must lie in (0, h]");
  const int top = state.highest_occupied_mode();
  const double k_top = std::max(std::abs(target_wavenumber), top > 0 ? state.basis.wavenumber(top) : 0.0);
  const double spacing = 2.0 * kPi / (32.0 * std::max(k_top, 1e-3));
  const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * window_halfwidth / spacing));
  std::vector<double> x(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    x[i] = -window_halfwidth + 2.0 * window_halfwidth * static_cast<double>(i) / static_cast<double>(intervals);
  double log_scale = 0.0;
  const auto psi = synthesize_scaled(state, x, t, &log_scale);
  const double total_t = state.elapsed + t;
  const cplx phase = std::polar(1.0, -0.5 * target_wavenumber * target_wavenumber * total_t);
  cplx overlap = 0.0;
  double n_target = 0.0;
  double n_state = 0.0;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
    const cplx target = std::sin(target_wavenumber * x[i]) * phase;
    overlap += w * std::conj(target) * psi[i];
    n_target += w * std::norm(target);
    n_state += w * std::norm(psi[i]);
  }
  if (n_state == 0.0 || n_target == 0.0) return 0.0;
  return std::min(1.0, std::norm(overlap) / (n_target * n_state));
}

GridWavefunction sample_on_grid(const BoxState& state, double x_min, double dx, std::size_t count) {
  if (!(dx > 0.0)) throw ResolutionError("grid spacing must be positive");
  const int top = state.highest_occupied_mode();
  if (top > 0) {
    const double k_top = state.basis.wavenumber(top);
    if (dx > 2.0 * kPi / (8.0 * k_top) * (1.0 + 1e-12))
      throw ResolutionError("grid coarser than 8 points per shortest wavelength");
  }
  const double h = state.basis.half_length;
  const double x_max = x_min + dx * static_cast<double>(count == 0 ? 0 : count - 1);
  if (x_min < -h * (1.0 + 1e-12) || x_max > h * (1.0 + 1e-12)) throw DomainError("grid extends outside the box");
  GridWavefunction wf;
  wf.x_min = x_min;
  wf.dx = dx;
  std::vector<double> x(count);
  for (std::size_t i = 0; i < count; ++i) x[i] = x_min + static_cast<double>(i) * dx;
  double log_scale = 0.0;
  wf.values = synthesize_scaled(state, x, 0.0, &log_scale);
  wf.log_scale = log_scale;
  return wf;
}

GridWavefunction sample_on_basis_grid(const BoxState& state) {
  const auto& b = state.basis;
  return sample_on_grid(state, b.grid_point(1), b.grid_spacing(), static_cast<std::size_t>(b.mode_count));
}

BoxState project_onto_basis(const GridWavefunction& wf, const BoxEigenbasis& basis) {
  const auto m = static_cast<std::size_t>(basis.mode_count);
  const double dx = basis.grid_spacing();
  if (wf.values.size() != m || std::abs(wf.dx - dx) > 1e-9 * dx || std::abs(wf.x_min - basis.grid_point(1)) > 1e-9 * dx)
    throw RepresentationError("wavefunction is not sampled on the basis grid");
  std::vector<double> re(m);
  std::vector<double> im(m);
  for (std::size_t i = 0; i < m; ++i) {
    re[i] = wf.values[i].real();
    im[i] = wf.values[i].imag();
  }
  std::vector<double> out_re(m);
  std::vector<double> out_im(m);
  fftw_plan p_re = fftw_plan_r2r_1d(static_cast<int>(m), re.data(), out_re.data(), FFTW_RODFT00, FFTW_ESTIMATE);
  fftw_plan p_im = fftw_plan_r2r_1d(static_cast<int>(m), im.data(), out_im.data(), FFTW_RODFT00, FFTW_ESTIMATE);
  fftw_execute(p_re);
  fftw_execute(p_im);
  fftw_destroy_plan(p_re);
  fftw_destroy_plan(p_im);
  // RODFT00: Y_k = 2 sum_j X_j sin(pi (j+1)(k+1)/(M+1)); a_m = dx/sqrt(h) sum_i psi_i sin(pi m i/(M+1))
  const double factor = 0.5 * dx / std::sqrt(basis.half_length) * std::exp(wf.log_scale);
  BoxState out;
  out.basis = basis;
  out.amplitudes.resize(m);
  for (std::size_t k = 0; k < m; ++k) out.amplitudes[k] = factor * cplx(out_re[k], out_im[k]);
  return out;
}

FreeSpreadEstimate estimate_free_spread(const GridWavefunction& wf) {
  FreeSpreadEstimate est;
  const std::size_t n = wf.values.size();
  double peak = 0.0;
  for (const auto& v : wf.values) peak = std::max(peak, std::norm(v));
  std::size_t lo = n;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::norm(wf.values[i]) > 1e-14 * peak) {
      lo = std::min(lo, i);
      hi = i;
    }
  if (lo == n) return est;
  est.support_min = wf.x(lo);
  est.support_max = wf.x(hi);

  std::vector<cplx> buf(wf.values);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  double mass = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double jj = j <= n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
    const double k = std::abs(2.0 * kPi * jj / (static_cast<double>(n) * wf.dx));
    const double w = std::norm(buf[j]);
    mass += w;
    m1 += w * k;
    m2 += w * k * k;
  }
  if (mass > 0.0) {
    est.mean_speed = m1 / mass;
    est.speed_spread = std::sqrt(std::max(0.0, m2 / mass - est.mean_speed * est.mean_speed));
  }
  return est;
}

GridWavefunction free_evolve(const GridWavefunction& wf, double t) {
  if (t == 0.0) return wf;
  const std::size_t n = wf.values.size();
  const auto est = estimate_free_spread(wf);
  const double reach = (est.mean_speed + 5.0 * est.speed_spread) * std::abs(t);
  if (est.support_min - reach < wf.x_min || est.support_max + reach > wf.x_max())
    throw ExtentError("free-line grid too short: packet would wrap around (needs +/- " + std::to_string(reach) +
                      " beyond its support)");
  GridWavefunction out = wf;
  auto* data = reinterpret_cast<fftw_complex*>(out.values.data());
  fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(fwd);
  for (std::size_t j = 0; j < n; ++j) {
    const double jj = j <= n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
    const double k = 2.0 * kPi * jj / (static_cast<double>(n) * wf.dx);
    out.values[j] *= std::polar(1.0 / static_cast<double>(n), -0.5 * k * k * t);
  }
  fftw_execute(bwd);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

void write_grid_binary(const std::string& path, const GridWavefunction& wf) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << std::setprecision(17);
  os << "superosc-grid 1\n"
     << "x_min " << wf.x_min << "\n"
     << "x_max " << wf.x_max() << "\n"
     << "dx " << wf.dx << "\n"
     << "count " << wf.values.size() << "\n"
     << "log_scale " << wf.log_scale << "\n"
     << "layout complex128-interleaved-little-endian\n"
     << "end\n";
  os.write(reinterpret_cast<const char*>(wf.values.data()),
           static_cast<std::streamsize>(wf.values.size() * sizeof(cplx)));
}

GridWavefunction read_grid_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  GridWavefunction wf;
  std::size_t count = 0;
  std::string line;
  std::getline(is, line);
  if (line != "superosc-grid 1") throw std::runtime_error(path + ": not a grid file");
  while (std::getline(is, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "x_min") ls >> wf.x_min;
    else if (key == "dx") ls >> wf.dx;
    else if (key == "count") ls >> count;
    else if (key == "log_scale") ls >> wf.log_scale;
  }
  wf.values.resize(count);
  is.read(reinterpret_cast<char*>(wf.values.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
  if (!is) throw std::runtime_error(path + ": truncated data");
  return wf;
}

void write_grid_csv(std::ostream& os, const GridWavefunction& wf) {
  os << "x,re,im\n" << std::setprecision(17);
  const double scale = std::exp(wf.log_scale);
  for (std::size_t i = 0; i < wf.values.size(); ++i)
    os << wf.x(i) << ',' << wf.values[i].real() * scale << ',' << wf.values[i].imag() * scale << '\n';
}

}  // namespace superosc
