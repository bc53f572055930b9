#include "superosc/opener_interaction.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "superosc/errors.hpp"

namespace superosc {

namespace {

constexpr double kPi = std::numbers::pi;

double bump_profile(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

// integral of bump_profile(u)^2 over u in [-1, 1]
double bump_norm_u() {
  static const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double u) { return bump_profile(u) * bump_profile(u); }, -1.0, 1.0, 15, 1e-14);
  return value;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

OpenerShape parse_opener_shape(const std::string& name) {
  if (name == "top_hat" || name == "tophat" || name == "top-hat") return OpenerShape::top_hat;
  if (name == "bump" || name == "smooth_bump") return OpenerShape::bump;
  if (name == "none") return OpenerShape::none;
  throw ConfigError("unknown opener shape '" + name + "' (expected top_hat, bump or none)");
}

std::string to_string(OpenerShape shape) {
  switch (shape) {
    case OpenerShape::top_hat: return "top_hat";
    case OpenerShape::bump: return "bump";
    case OpenerShape::none: return "none";
  }
  return "?";
}

double OpenerPacket::norm_squared() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += weight(i);
  return s;
}

double OpenerPacket::continuous_value(double q) const {
  if (shape == OpenerShape::none || width <= 0.0) return 0.0;
  if (q < -width || q > 0.0) return 0.0;
  if (shape == OpenerShape::top_hat) return 1.0 / std::sqrt(width);
  const double u = -2.0 * q / width - 1.0;
  return bump_profile(u) / std::sqrt(0.5 * width * bump_norm_u());
}

cplx OpenerPacket::sampled_transform(double p) const {
  cplx sum = 0.0;
  for (std::size_t s = 0; s < size(); ++s) sum += dtau * values[s] * std::polar(1.0, p * tau[s]);
  return sum / std::sqrt(2.0 * kPi);
}

double OpenerPacket::continuous_density(double p) const {
  if (shape == OpenerShape::none || width <= 0.0) return 0.0;
  if (shape == OpenerShape::top_hat) {
    const double s = sinc(0.5 * p * width);
    return width / (2.0 * kPi) * s * s;
  }
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double re = GK::integrate([&](double q) { return continuous_value(q) * std::cos(p * q); }, -width, 0.0, 15, 1e-13);
  const double im = GK::integrate([&](double q) { return continuous_value(q) * std::sin(p * q); }, -width, 0.0, 15, 1e-13);
  return (re * re + im * im) / (2.0 * kPi);
}

OpenerPacket make_opener(OpenerShape shape, double width, double dtau_target) {
  if (!(dtau_target > 0.0)) throw ResolutionError("opener sample spacing must be positive");
  if (width < 0.0) throw DomainError("opener width must be >= 0");
  OpenerPacket op;
  op.shape = shape;
  op.width = width;
  op.dtau = dtau_target;
  if (shape == OpenerShape::none) return op;
  if (width == 0.0) {
    op.tau = {0.0};
    op.values = {1.0 / std::sqrt(dtau_target)};
    return op;
  }
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(width / dtau_target - 1e-9)));
  op.dtau = width / static_cast<double>(steps);
  op.tau.resize(steps + 1);
  op.values.resize(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) op.tau[s] = static_cast<double>(s) * op.dtau;
  if (shape == OpenerShape::top_hat) {
    // midpoint value at the two jumps keeps the sampled norm exact
    for (std::size_t s = 0; s <= steps; ++s) op.values[s] = 1.0 / std::sqrt(width);
    op.values.front() /= std::sqrt(2.0);
    op.values.back() /= std::sqrt(2.0);
  } else {
    double norm = 0.0;
    for (std::size_t s = 0; s <= steps; ++s) {
      op.values[s] = bump_profile(2.0 * op.tau[s] / width - 1.0);
      norm += op.dtau * op.values[s] * op.values[s];
    }
    for (auto& v : op.values) v /= std::sqrt(norm);
  }
  return op;
}

bool ReleaseWindow::inside_superoscillation_region(const SuperoscSpec& spec) const {
  return half_width <= spec.sqrt_n_scale() * (1.0 + 1e-12);
}

std::pair<GridWavefunction, GridWavefunction> spin_flip_window(const GridWavefunction& wf, const ReleaseWindow& window) {
  GridWavefunction released = wf;
  GridWavefunction trapped = wf;
  for (std::size_t i = 0; i < wf.values.size(); ++i) {
    if (window.contains(wf.x(i))) {
      released.values[i] = cplx(0.0, -1.0) * wf.values[i];
      trapped.values[i] = 0.0;
    } else {
      released.values[i] = 0.0;
    }
  }
  return {released, trapped};
}

cplx JointBranches::released_amplitude(std::size_t s, std::size_t j) const {
  const double rest = duration - opener.tau[s];
  return opener.values[s] * cplx(0.0, -1.0) * released_k[s * k.size() + j] * std::polar(1.0, -0.5 * k[j] * k[j] * rest);
}

std::vector<cplx> JointBranches::trapped_after_kick(std::size_t s) const {
  const auto m_count = static_cast<std::size_t>(initial.basis.mode_count);
  std::vector<cplx> b(m_count);
  const double t = opener.tau[s];
  for (std::size_t m = 0; m < m_count; ++m) {
    const cplx a = initial.amplitudes[m];
    b[m] = a == cplx(0.0) ? cplx(0.0) : a * std::polar(1.0, -initial.basis.energy(static_cast<int>(m + 1)) * t);
  }
  if (!trapped_kick.empty()) {
    const double scale = std::exp(log_scale);
    for (std::size_t m = 0; m < m_count; ++m) b[m] -= scale * trapped_kick[s * m_count + m];
  }
  return b;
}

BoxState JointBranches::trapped_state(std::size_t s) const {
  BoxState out;
  out.basis = initial.basis;
  out.amplitudes = trapped_after_kick(s);
  const double rest = duration - opener.tau[s];
  for (std::size_t m = 0; m < out.amplitudes.size(); ++m)
    out.amplitudes[m] *= std::polar(1.0, -initial.basis.energy(static_cast<int>(m + 1)) * rest);
  out.elapsed = initial.elapsed + duration;
  return out;
}

GridWavefunction JointBranches::released_wavefunction(std::size_t s, double extent) const {
  GridWavefunction wf;
  wf.dx = dx;
  const auto half = static_cast<std::size_t>(std::ceil(extent / dx));
  // grid aligned with the box grid point nearest the origin
  const double centre = window_x.empty() ? 0.0 : window_x[window_x.size() / 2];
  wf.x_min = centre - static_cast<double>(half) * dx;
  wf.values.assign(2 * half + 1, cplx(0.0));
  wf.log_scale = log_scale;
  const std::size_t p_count = window_x.size();
  for (std::size_t p = 0; p < p_count; ++p) {
    const auto idx = static_cast<long>(std::llround((window_x[p] - wf.x_min) / dx));
    if (idx < 0 || static_cast<std::size_t>(idx) >= wf.values.size())
      throw ExtentError("free-line extent smaller than the release window");
    wf.values[static_cast<std::size_t>(idx)] = cplx(0.0, -1.0) * window_samples[s * p_count + p];
  }
  return free_evolve(wf, duration - opener.tau[s]);
}

std::vector<double> JointBranches::released_momentum_density() const {
  std::vector<double> dens(k.size(), 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < tau_count(); ++s) {
    const double w = opener.weight(s);
    for (std::size_t j = 0; j < k.size(); ++j) {
      const double v = w * std::norm(released_k[s * k.size() + j]);
      dens[j] += v;
      total += v * dk;
    }
  }
  if (total > 0.0)
    for (auto& d : dens) d /= total;
  return dens;
}

JointBranches exact_joint_evolution(const BoxState& state, const OpenerPacket& opener, const ReleaseWindow& window,
                                    const JointOptions& options) {
  JointBranches jb;
  jb.initial = state;
  jb.opener = opener;
  jb.window = window;
  jb.duration = options.duration;
  const BoxEigenbasis& basis = state.basis;
  jb.dx = basis.grid_spacing();
  jb.p_trapped = state.norm_squared();

  if (options.duration < 0.0) throw DomainError("duration must be >= 0");
  if (!opener.tau.empty() && opener.tau.back() > options.duration * (1.0 + 1e-12))
    throw DomainError("opener support [-width, 0] must lie within [-T, 0]");
  if (options.reference_wavenumber > 0.0 && opener.size() > 1) {
    const double step_phase = 0.5 * options.reference_wavenumber * options.reference_wavenumber * opener.dtau;
    if (step_phase > kPi / 4.0)
      throw ResolutionError("tau grid too coarse: alpha^2 dtau / 2 = " + std::to_string(step_phase) + " > pi/4");
  }

  for (int i = 1; i <= basis.mode_count; ++i)
    if (window.contains(basis.grid_point(i))) {
      jb.window_index.push_back(i);
      jb.window_x.push_back(basis.grid_point(i));
    }
  const std::size_t s_count = opener.size();
  const std::size_t p_count = jb.window_x.size();
  const auto m_count = static_cast<std::size_t>(basis.mode_count);

  const std::size_t q = next_pow2(std::max<std::size_t>(16, static_cast<std::size_t>(options.k_padding) * std::max<std::size_t>(p_count, 1)));
  jb.dk = 2.0 * kPi / (static_cast<double>(q) * jb.dx);
  jb.k.resize(q);
  for (std::size_t j = 0; j < q; ++j) jb.k[j] = (static_cast<double>(j) - static_cast<double>(q / 2)) * jb.dk;

  jb.released_k.assign(s_count * q, cplx(0.0));
  if (s_count == 0 || p_count == 0) return jb;

  jb.window_samples = synthesize_scaled_batch(state, jb.window_x, opener.tau, &jb.log_scale);

  std::vector<cplx> dft(q * p_count);
  const double pref = jb.dx / std::sqrt(2.0 * kPi);
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t p = 0; p < p_count; ++p) dft[j * p_count + p] = pref * std::polar(1.0, -jb.k[j] * jb.window_x[p]);
  kernels::parallel::apply_complex_table(dft, q, p_count, jb.window_samples, s_count, jb.released_k);

  if (options.keep_trapped) {
    // dx phi_m(x_i) = dx sin(pi m i / (M+1)) / sqrt(h), argument reduced exactly
    std::vector<double> proj(m_count * p_count);
    const double pref_m = jb.dx / std::sqrt(basis.half_length);
    const long period = 2L * (basis.mode_count + 1);
    for (std::size_t m = 0; m < m_count; ++m)
      for (std::size_t p = 0; p < p_count; ++p) {
        const long r = (static_cast<long>(m + 1) * jb.window_index[p]) % period;
        proj[m * p_count + p] = pref_m * std::sin(kPi * static_cast<double>(r) / (basis.mode_count + 1));
      }
    jb.trapped_kick.resize(s_count * m_count);
    kernels::parallel::apply_real_table(proj, m_count, p_count, jb.window_samples, s_count, jb.trapped_kick);
  }

  double folded = 0.0;
  double max_mass = 0.0;
  for (std::size_t s = 0; s < s_count; ++s) {
    double mass = 0.0;
    for (std::size_t p = 0; p < p_count; ++p) mass += std::norm(jb.window_samples[s * p_count + p]);
    mass *= jb.dx;
    folded += opener.weight(s) * mass;
    max_mass = std::max(max_mass, mass);
  }
  jb.log_p_released = folded > 0.0 ? std::log(folded) + 2.0 * jb.log_scale : -std::numeric_limits<double>::infinity();
  jb.p_released = std::exp(jb.log_p_released);
  jb.log_max_window_mass = max_mass > 0.0 ? std::log(max_mass) + 2.0 * jb.log_scale : -std::numeric_limits<double>::infinity();
  jb.max_window_mass = std::exp(jb.log_max_window_mass);

  if (options.keep_trapped) {
    double trapped = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
      const auto b = jb.trapped_after_kick(s);
      double n2 = 0.0;
      for (const auto& v : b) n2 += std::norm(v);
      trapped += opener.weight(s) * n2;
    }
    jb.p_trapped = trapped;
  } else {
    jb.p_trapped = state.norm_squared() * opener.norm_squared() - jb.p_released;
  }
  return jb;
}

cplx truncated_spectrum(double alpha, double half_width, double k) {
  const double L = half_width;
  const double a = 2.0 * L * sinc((alpha - k) * L);
  const double b = 2.0 * L * sinc((alpha + k) * L);
  return (a - b) / cplx(0.0, 2.0);
}

std::vector<cplx> released_branch(const JointBranches& exact) {
  std::vector<cplx> out(exact.tau_count() * exact.k_count());
  for (std::size_t s = 0; s < exact.tau_count(); ++s)
    for (std::size_t j = 0; j < exact.k_count(); ++j) out[s * exact.k_count() + j] = exact.released_amplitude(s, j);
  return out;
}

std::vector<cplx> approx_released_state(double alpha, const JointBranches& exact) {
  const double T = exact.duration;
  std::vector<cplx> out(exact.tau_count() * exact.k_count());
  for (std::size_t s = 0; s < exact.tau_count(); ++s) {
    const double q = T - exact.opener.tau[s];
    for (std::size_t j = 0; j < exact.k_count(); ++j) {
      const double k = exact.k[j];
      const double phase = -0.5 * alpha * alpha * T - (0.5 * k * k - 0.5 * alpha * alpha) * q;
      out[s * exact.k_count() + j] =
          exact.opener.values[s] * std::polar(1.0, phase) * truncated_spectrum(alpha, exact.window.half_width, k);
    }
  }
  return out;
}

double branch_fidelity(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("branch_fidelity: grids differ");
  cplx overlap = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    overlap += std::conj(a[i]) * b[i];
    na += std::norm(a[i]);
    nb += std::norm(b[i]);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::norm(overlap) / (na * nb);
}

double release_probability(const JointBranches& branches) { return branches.p_released; }

}  // namespace superosc
