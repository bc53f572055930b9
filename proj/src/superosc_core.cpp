#include "superosc/superosc_core.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "superosc/errors.hpp"

namespace superosc {

namespace {

constexpr double kPi = std::numbers::pi;

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void SuperoscSpec::validate() const {
  if (n_order < 1) throw ParameterRangeError("n_order must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterRangeError("alpha must be a positive finite number");
  if (!(unit_length > 0.0) || !std::isfinite(unit_length)) throw ParameterRangeError("unit_length must be positive");
  const double digits = n_order * std::log10(std::max(alpha, 1.0));
  if (digits > kMaxDecimalRange) {
    std::ostringstream msg;
    msg << "dynamic range N*log10(alpha) = " << digits << " exceeds " << kMaxDecimalRange
        << " decimal digits; reduce N or alpha";
    throw ParameterRangeError(msg.str());
  }
}

double SuperoscSpec::half_length() const { return kPi * n_order * unit_length; }

double SuperoscSpec::sqrt_n_scale() const { return std::sqrt(static_cast<double>(n_order)) * unit_length; }

double SuperoscSpec::second_order_scale() const {
  if (alpha <= 1.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * n_order / (alpha * alpha - 1.0)) * unit_length;
}

double SuperoscSpec::log_coefficient_mass() const { return n_order * std::log(std::max(alpha, 1.0)); }

std::vector<FourierMode> binomial_coefficients(const SuperoscSpec& spec) {
  spec.validate();
  const int n_total = spec.n_order;
  const double log_plus = std::log1p(spec.alpha);
  const double minus = 1.0 - spec.alpha;
  const double log_minus = minus == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(minus));

  std::vector<FourierMode> modes(static_cast<std::size_t>(n_total) + 1);
  for (int n = 0; n <= n_total; ++n) {
    FourierMode& m = modes[static_cast<std::size_t>(n)];
    m.index = n;
    m.wavenumber = (2.0 * n / n_total - 1.0) / spec.unit_length;
    const int power_minus = n_total - n;
    if (power_minus > 0 && minus == 0.0) {
      m.log_abs_coefficient = -std::numeric_limits<double>::infinity();
      m.sign = 0;
      m.coefficient = 0.0;
      continue;
    }
    m.log_abs_coefficient = log_binomial(n_total, n) + n * log_plus +
                            (power_minus > 0 ? power_minus * log_minus : 0.0) - n_total * std::log(2.0);
    m.sign = (minus < 0.0 && (power_minus % 2 == 1)) ? -1 : 1;
    m.coefficient = m.sign * std::exp(m.log_abs_coefficient);
  }
  return modes;
}

std::vector<ExtFloat> binomial_coefficients_extended(const SuperoscSpec& spec, mpfr_prec_t bits) {
  spec.validate();
  const auto n_total = static_cast<unsigned long>(spec.n_order);
  const ExtFloat plus(1.0 + spec.alpha, bits);
  ExtFloat minus(1.0, bits);
  minus -= ExtFloat(spec.alpha, bits);
  ExtFloat two_n(2.0, bits);
  two_n = two_n.pow(n_total);

  std::vector<ExtFloat> out;
  out.reserve(n_total + 1);
  for (unsigned long n = 0; n <= n_total; ++n) {
    ExtFloat c = ExtFloat::binomial(n_total, n, bits);
    c *= plus.pow(n);
    c *= minus.pow(n_total - n);  // MPFR: 0^0 = 1
    c /= two_n;
    out.push_back(std::move(c));
  }
  return out;
}

std::pair<double, double> eval_log_f(const SuperoscSpec& spec, double x) {
  spec.validate();
  const double h = spec.half_length();
  if (std::abs(x) > h * (1.0 + 1e-12)) throw DomainError("x outside |x| <= pi N a");
  const double u = x / (spec.n_order * spec.unit_length);
  const cplx z(std::cos(u), spec.alpha * std::sin(u));
  const cplx lz = std::log(z);
  return {spec.n_order * lz.real(), spec.n_order * lz.imag()};
}

cplx eval_f(const SuperoscSpec& spec, double x) {
  const auto [log_mag, phase] = eval_log_f(spec, x);
  return std::polar(std::exp(log_mag), phase);
}

cplx eval_f_sum(const SuperoscSpec& spec, double x, mpfr_prec_t bits) {
  spec.validate();
  if (std::abs(x) > spec.half_length() * (1.0 + 1e-12)) throw DomainError("x outside |x| <= pi N a");
  const int n_total = spec.n_order;
  if (bits == 0) {
    const auto modes = binomial_coefficients(spec);
    cplx sum = 0.0;
    for (const auto& m : modes) sum += m.coefficient * std::polar(1.0, m.wavenumber * x);
    return sum;
  }
  const auto coeffs = binomial_coefficients_extended(spec, bits);
  ExtFloat re(bits);
  ExtFloat im(bits);
  const ExtFloat xe(x, bits);
  for (int n = 0; n <= n_total; ++n) {
    // k_n x = (2n - N) x / (N a)
    ExtFloat angle = xe;
    angle *= static_cast<double>(2 * n - n_total);
    angle /= ExtFloat(static_cast<double>(n_total) * spec.unit_length, bits);
    const auto [s, c] = angle.sin_cos();
    re.fma_add(coeffs[static_cast<std::size_t>(n)], c);
    im.fma_add(coeffs[static_cast<std::size_t>(n)], s);
  }
  return {re.to_double(), im.to_double()};
}

double BoxStateSpec::norm_squared() const {
  double sum = 0.0;
  for (const auto& m : sine_modes) sum += m.amplitude * m.amplitude;
  return sum * kPi * spec.n_order * spec.unit_length;
}

BoxStateSpec build_box_state(const SuperoscSpec& spec) {
  const auto modes = binomial_coefficients(spec);
  const int n_total = spec.n_order;
  BoxStateSpec state;
  state.spec = spec;

  std::vector<double> raw;  // u_k = -2 (c_n - c_{N-n})
  for (int n = 0; n <= n_total; ++n) {
    if (2 * n <= n_total) continue;  // keep k_n > 0; k = 0 contributes nothing
    const double diff = modes[static_cast<std::size_t>(n)].coefficient -
                        modes[static_cast<std::size_t>(n_total - n)].coefficient;
    state.sine_modes.push_back({n, modes[static_cast<std::size_t>(n)].wavenumber, 0.0});
    raw.push_back(-2.0 * diff);
  }

  double log_max = -std::numeric_limits<double>::infinity();
  for (double u : raw)
    if (u != 0.0) log_max = std::max(log_max, std::log(std::abs(u)));
  double scaled_sum = 0.0;
  for (double u : raw)
    if (u != 0.0) scaled_sum += std::exp(2.0 * (std::log(std::abs(u)) - log_max));
  const double log_box = std::log(kPi * n_total * spec.unit_length);
  state.log_norm_constant = log_max + 0.5 * (std::log(scaled_sum) + log_box);
  state.norm_constant = std::exp(state.log_norm_constant);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double u = raw[i];
    state.sine_modes[i].amplitude =
        u == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(u)) - state.log_norm_constant), u);
  }
  return state;
}

std::vector<ExtFloat> unnormalized_sine_amplitudes(const BoxStateSpec& state, mpfr_prec_t bits) {
  const auto coeffs = binomial_coefficients_extended(state.spec, bits);
  const int n_total = state.spec.n_order;
  std::vector<ExtFloat> out;
  out.reserve(state.sine_modes.size());
  for (const auto& m : state.sine_modes) {
    ExtFloat u = coeffs[static_cast<std::size_t>(m.index)];
    u -= coeffs[static_cast<std::size_t>(n_total - m.index)];
    u *= -2.0;
    out.push_back(std::move(u));
  }
  return out;
}

double eval_psi(const BoxStateSpec& state, double x) {
  const double h = state.spec.half_length();
  if (std::abs(x) > h * (1.0 + 1e-12)) throw DomainError("x outside the box");
  if (std::abs(x) >= h) return 0.0;  // every sin(k_n pi N a) vanishes
  const auto [log_mag, phase] = eval_log_f(state.spec, x);
  return -2.0 * std::exp(log_mag - state.log_norm_constant) * std::sin(phase);
}

double eval_psi_modes(const BoxStateSpec& state, double x) {
  if (std::abs(x) > state.spec.half_length() * (1.0 + 1e-12)) throw DomainError("x outside the box");
  double sum = 0.0;
  for (const auto& m : state.sine_modes) sum += m.amplitude * std::sin(m.wavenumber * x);
  return sum;
}

double local_wavenumber(const SuperoscSpec& spec, double x) {
  const double u = x / (spec.n_order * spec.unit_length);
  const cplx z(std::cos(u), spec.alpha * std::sin(u));
  const cplx dz(-std::sin(u), spec.alpha * std::cos(u));
  return (dz / z).imag() / spec.unit_length;
}

RegionReport superosc_region_report(const SuperoscSpec& spec, double radius) {
  spec.validate();
  if (radius < 0.0 || radius > spec.half_length()) throw DomainError("radius must lie in [0, pi N a]");
  RegionReport r;
  r.radius = radius;
  r.sqrt_n_scale = spec.sqrt_n_scale();
  r.second_order_scale = spec.second_order_scale();
  const double wavelength = 2.0 * kPi / std::max(spec.alpha / spec.unit_length, 1e-12);
  const int intervals = radius == 0.0 ? 0 : std::max(2, static_cast<int>(std::ceil(2.0 * radius / wavelength * 64.0)));
  r.samples = intervals + 1;
  r.wavenumber_min = std::numeric_limits<double>::infinity();
  r.wavenumber_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= intervals; ++i) {
    const double x = intervals == 0 ? 0.0 : -radius + 2.0 * radius * i / intervals;
    const auto [log_mag, phase] = eval_log_f(spec, x);
    // f e^{-i alpha x} - 1 with the phase difference taken before exponentiating
    const cplx ratio = std::polar(std::exp(log_mag), phase - spec.alpha * x / spec.unit_length);
    r.max_deviation = std::max(r.max_deviation, std::abs(ratio - 1.0));
    const double kw = local_wavenumber(spec, x);
    r.wavenumber_min = std::min(r.wavenumber_min, kw);
    r.wavenumber_max = std::max(r.wavenumber_max, kw);
  }
  return r;
}

double log_max_abs_f(const SuperoscSpec& spec, int samples) {
  const double h = spec.half_length();
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double x = -h + 2.0 * h * i / (samples - 1);
    best = std::max(best, eval_log_f(spec, x).first);
  }
  return best;
}

void write_mode_table_csv(std::ostream& os, const std::vector<FourierMode>& modes) {
  os << "n,k_n,c_n\n";
  os << std::setprecision(17);
  for (const auto& m : modes) os << m.index << ',' << m.wavenumber << ',' << m.coefficient << '\n';
}

}  // namespace superosc
