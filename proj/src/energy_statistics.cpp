#include "superosc/energy_statistics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "superosc/errors.hpp"

namespace superosc {

namespace {

constexpr double kPi = std::numbers::pi;

double interp(const EnergyDistribution& d, double e) {
  double pos = (e - d.e_min) / d.de;
  const auto n = static_cast<double>(d.density.size());
  if (d.periodic) {
    pos = std::fmod(pos, n);
    if (pos < 0) pos += n;
  } else if (pos < 0.0 || pos > n - 1.0) {
    return 0.0;
  }
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i0);
  const std::size_t i1 = (i0 + 1) % d.density.size();
  if (!d.periodic && i0 + 1 >= d.density.size()) return d.density[i0];
  return (1.0 - f) * d.density[i0] + f * d.density[i1];
}

bool is_integer_multiple(double x, double step) {
  const double r = x / step;
  return std::abs(r - std::round(r)) < 1e-9;
}

EnergyDistribution gridded(const std::string& label, double e_min, double de, std::vector<double> density,
                           bool periodic) {
  EnergyDistribution d;
  d.kind = DistributionKind::gridded;
  d.label = label;
  d.e_min = e_min;
  d.de = de;
  d.density = std::move(density);
  d.periodic = periodic;
  return d;
}

// |sum_s c_s X_r(s) e^{i E tau_s}|^2 summed over rows, on e_min + j 2pi/(q dtau).
std::vector<double> fold_rows(const std::vector<cplx>& rows, std::size_t row_count, const OpenerPacket& op,
                              double e_min, std::size_t q) {
  const std::size_t s_count = op.size();
  std::vector<cplx> c(s_count);
  for (std::size_t s = 0; s < s_count; ++s)
    c[s] = op.dtau * op.values[s] / std::sqrt(2.0 * kPi) * std::polar(1.0, e_min * op.tau[s]);
  std::vector<double> acc(q, 0.0);
  if (row_count > 0) kernels::parallel::fold_power(rows, row_count, s_count, c, q, acc);
  return acc;
}

std::vector<cplx> trapped_rows(const JointBranches& jb, bool interaction_frame, std::size_t* count) {
  const auto m_count = static_cast<std::size_t>(jb.initial.basis.mode_count);
  const std::size_t s_count = jb.tau_count();
  std::vector<cplx> rows;
  rows.reserve(m_count * s_count);
  std::vector<std::vector<cplx>> after(s_count);
  for (std::size_t s = 0; s < s_count; ++s) after[s] = jb.trapped_after_kick(s);
  *count = 0;
  for (std::size_t m = 0; m < m_count; ++m) {
    bool any = false;
    for (std::size_t s = 0; s < s_count && !any; ++s) any = after[s][m] != cplx(0.0);
    if (!any) continue;
    const double e = jb.initial.basis.energy(static_cast<int>(m + 1));
    for (std::size_t s = 0; s < s_count; ++s)
      rows.push_back(interaction_frame ? after[s][m] * std::polar(1.0, e * jb.opener.tau[s]) : after[s][m]);
    ++*count;
  }
  return rows;
}

std::vector<cplx> released_rows(const JointBranches& jb, double scale, bool opener_frame) {
  const std::size_t s_count = jb.tau_count();
  const std::size_t k_count = jb.k_count();
  std::vector<cplx> rows(k_count * s_count);
  const double w = scale * std::sqrt(jb.dk);
  for (std::size_t j = 0; j < k_count; ++j) {
    const double e = 0.5 * jb.k[j] * jb.k[j];
    for (std::size_t s = 0; s < s_count; ++s) {
      cplx v = w * jb.released_k[s * k_count + j];
      if (opener_frame) v *= std::polar(1.0, e * jb.opener.tau[s]);
      rows[j * s_count + s] = v;
    }
  }
  return rows;
}

// phi_m at basis grid index i, in MPFR: sin(pi m i / (M+1)) / sqrt(h)
ExtFloat box_mode_at_grid(int m, int i, int mode_count, const ExtFloat& pi, const ExtFloat& inv_sqrt_h) {
  const long period = 2L * (mode_count + 1);
  const long r = (static_cast<long>(m) * i) % period;
  ExtFloat arg = pi;
  arg *= static_cast<double>(r);
  arg /= ExtFloat(static_cast<double>(mode_count + 1), pi.precision());
  auto [s, c] = arg.sin_cos();
  return s * inv_sqrt_h;
}

}  // namespace

double EnergyDistribution::total_mass() const {
  double s = outside_mass;
  if (kind == DistributionKind::discrete)
    for (double p : probability) s += p;
  else
    for (double v : density) s += v * de;
  return s;
}

double EnergyDistribution::mass_above(double e) const {
  double s = 0.0;
  if (kind == DistributionKind::discrete) {
    for (std::size_t i = 0; i < energy.size(); ++i)
      if (energy[i] > e) s += probability[i];
  } else {
    for (std::size_t j = 0; j < density.size(); ++j)
      if (grid_energy(j) > e) s += density[j] * de;
  }
  return s;
}

double EnergyDistribution::max_energy_with_mass(double threshold) const {
  double best = -std::numeric_limits<double>::infinity();
  if (kind == DistributionKind::discrete) {
    for (std::size_t i = 0; i < energy.size(); ++i)
      if (probability[i] > threshold) best = std::max(best, energy[i]);
  } else {
    for (std::size_t j = 0; j < density.size(); ++j)
      if (density[j] * de > threshold) best = std::max(best, grid_energy(j));
  }
  return best;
}

EnergyDistribution point_mass(double e, const std::string& label) {
  EnergyDistribution d;
  d.label = label;
  d.energy = {e};
  d.probability = {1.0};
  return d;
}

EnergyDistribution bin_distribution(const EnergyDistribution& d, double e_min, double de, std::size_t cells) {
  if (d.kind != DistributionKind::discrete) throw std::invalid_argument("bin_distribution expects a discrete input");
  EnergyDistribution out = gridded(d.label, e_min, de, std::vector<double>(cells, 0.0), false);
  for (std::size_t i = 0; i < d.energy.size(); ++i) {
    const double pos = (d.energy[i] - e_min) / de;
    if (pos < 0.0 || pos >= static_cast<double>(cells)) {
      out.outside_mass += d.probability[i];
      continue;
    }
    out.density[static_cast<std::size_t>(pos)] += d.probability[i] / de;
  }
  // report the cell centre rather than its left edge
  out.e_min = e_min + 0.5 * de;
  return out;
}

bool AxiomCheck::ok(double tol) const {
  return !(unit_error > tol) && max_modulus <= 1.0 + tol && hermitian_error <= tol;
}

AxiomCheck check_axioms(const CharacteristicSeries& series) {
  AxiomCheck c;
  c.unit_error = std::numeric_limits<double>::quiet_NaN();
  std::map<double, cplx> by_tau;
  for (std::size_t i = 0; i < series.tau.size(); ++i) {
    by_tau[series.tau[i]] = series.value[i];
    c.max_modulus = std::max(c.max_modulus, std::abs(series.value[i]));
    if (series.tau[i] == 0.0) c.unit_error = std::abs(series.value[i] - 1.0);
  }
  for (const auto& [t, v] : by_tau) {
    if (t <= 0.0) continue;
    auto it = by_tau.find(-t);
    if (it != by_tau.end()) c.hermitian_error = std::max(c.hermitian_error, std::abs(it->second - std::conj(v)));
  }
  return c;
}

std::vector<double> symmetric_tau_grid(double tau_max, double step) {
  const auto n = static_cast<long>(std::floor(tau_max / step + 1e-9));
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long j = -n; j <= n; ++j) t.push_back(static_cast<double>(j) * step);
  return t;
}

EnergyDistribution photon_energy_distribution(const BoxState& state) {
  EnergyDistribution d;
  d.label = "photon";
  for (int m = 1; m <= state.basis.mode_count; ++m) {
    const double p = std::norm(state.amplitudes[static_cast<std::size_t>(m - 1)]);
    if (p == 0.0) continue;
    d.energy.push_back(state.basis.energy(m));
    d.probability.push_back(p);
  }
  return d;
}

EnergyDistribution photon_energy_distribution(const JointBranches& jb) {
  if (jb.tau_count() == 0) {
    auto d = photon_energy_distribution(jb.initial);
    d.label = "photon final";
    return d;
  }
  if (jb.trapped_kick.empty() && !jb.window_x.empty())
    throw std::invalid_argument("final photon distribution needs the trapped projections");
  const auto m_count = static_cast<std::size_t>(jb.initial.basis.mode_count);
  std::vector<double> trapped(m_count, 0.0);
  for (std::size_t s = 0; s < jb.tau_count(); ++s) {
    const auto b = jb.trapped_after_kick(s);
    const double w = jb.opener.weight(s);
    for (std::size_t m = 0; m < m_count; ++m) trapped[m] += w * std::norm(b[m]);
  }
  EnergyDistribution d;
  d.label = "photon final";
  for (std::size_t m = 0; m < m_count; ++m) {
    if (trapped[m] == 0.0) continue;
    d.energy.push_back(jb.initial.basis.energy(static_cast<int>(m + 1)));
    d.probability.push_back(trapped[m]);
  }
  const double scale2 = std::exp(2.0 * jb.log_scale);
  for (std::size_t j = 0; j < jb.k_count(); ++j) {
    double w = 0.0;
    for (std::size_t s = 0; s < jb.tau_count(); ++s) w += jb.opener.weight(s) * std::norm(jb.released_k[s * jb.k_count() + j]);
    w *= jb.dk * scale2;
    if (w == 0.0) continue;
    d.energy.push_back(0.5 * jb.k[j] * jb.k[j]);
    d.probability.push_back(w);
  }
  return d;
}

EnergyDistribution released_energy_histogram(const JointBranches& jb, double de, double e_max) {
  const auto dens = jb.released_momentum_density();
  EnergyDistribution pts;
  for (std::size_t j = 0; j < jb.k_count(); ++j) {
    pts.energy.push_back(0.5 * jb.k[j] * jb.k[j]);
    pts.probability.push_back(dens[j] * jb.dk);
  }
  const auto cells = static_cast<std::size_t>(std::ceil(e_max / de));
  auto out = bin_distribution(pts, 0.0, de, cells);
  out.label = "photon released";
  return out;
}

EnergyDistribution opener_energy_distribution(const OpenerPacket& packet, std::size_t q) {
  const double p_min = -kPi / packet.dtau;
  std::vector<cplx> ones(packet.size(), cplx(1.0));
  auto acc = fold_rows(ones, 1, packet, p_min, q);
  return gridded("opener initial", p_min, 2.0 * kPi / (static_cast<double>(q) * packet.dtau), std::move(acc), true);
}

EnergyDistribution opener_energy_distribution(const JointBranches& jb, std::size_t q, BranchSelect which) {
  const OpenerPacket& op = jb.opener;
  const double p_min = -kPi / op.dtau;
  const double de = 2.0 * kPi / (static_cast<double>(q) * op.dtau);
  std::vector<double> acc(q, 0.0);
  std::string label = "opener final";
  if (which == BranchSelect::released) {
    const auto rows = released_rows(jb, 1.0, true);
    acc = fold_rows(rows, jb.k_count(), op, p_min, q);
    double mass = 0.0;
    for (double v : acc) mass += v * de;
    if (mass > 0.0)
      for (auto& v : acc) v /= mass;
    label = "opener released";
  } else {
    std::size_t count = 0;
    const auto rows = trapped_rows(jb, true, &count);
    acc = fold_rows(rows, count, op, p_min, q);
    if (which == BranchSelect::both) {
      const auto rel = released_rows(jb, std::exp(jb.log_scale), true);
      const auto extra = fold_rows(rel, jb.k_count(), op, p_min, q);
      for (std::size_t j = 0; j < q; ++j) acc[j] += extra[j];
    } else {
      label = "opener trapped";
    }
  }
  return gridded(label, p_min, de, std::move(acc), true);
}

EnergyDistribution opener_continuous_distribution(const OpenerPacket& packet, double p_min, double dp, std::size_t count) {
  std::vector<double> d(count);
  for (std::size_t j = 0; j < count; ++j) d[j] = packet.continuous_density(p_min + static_cast<double>(j) * dp);
  return gridded("opener continuous", p_min, dp, std::move(d), false);
}

cplx opener_autocorrelation(const OpenerPacket& packet, double tau) {
  const double w = packet.width;
  if (packet.shape == OpenerShape::none) return 0.0;
  if (w == 0.0) return tau == 0.0 ? 1.0 : 0.0;
  const double a = std::abs(tau);
  if (a >= w) return 0.0;
  if (packet.shape == OpenerShape::top_hat) return (w - a) / w;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  // phi(q) phi(q - tau): both nonzero on [-w + max(tau,0), min(tau,0)]
  const double lo = -w + std::max(tau, 0.0);
  const double hi = std::min(tau, 0.0);
  return GK::integrate([&](double q) { return packet.continuous_value(q) * packet.continuous_value(q - tau); }, lo, hi,
                       15, 1e-14);
}

cplx opener_lattice_autocorrelation(const OpenerPacket& packet, long j) {
  const auto n = static_cast<long>(packet.size());
  const long a = std::abs(j);
  double s = 0.0;
  for (long i = 0; i + a < n; ++i) s += packet.dtau * packet.values[static_cast<std::size_t>(i)] *
                                        packet.values[static_cast<std::size_t>(i + a)];
  return s;
}

std::size_t energy_grid_points(const OpenerPacket& packet, double de_max) {
  const double period = 2.0 * kPi / packet.dtau;
  std::size_t q = 1;
  while (static_cast<double>(q) < std::max(period / de_max, 2.0 * static_cast<double>(packet.size()))) q <<= 1;
  return q;
}

EnergyDistribution total_energy_initial(const JointBranches& jb, double e_min, std::size_t q) {
  const auto& st = jb.initial;
  const std::size_t s_count = jb.tau_count();
  std::vector<cplx> rows;
  std::size_t count = 0;
  for (int m = 1; m <= st.basis.mode_count; ++m) {
    const cplx a = st.amplitudes[static_cast<std::size_t>(m - 1)];
    if (a == cplx(0.0)) continue;
    for (std::size_t s = 0; s < s_count; ++s) rows.push_back(a * std::polar(1.0, -st.basis.energy(m) * jb.opener.tau[s]));
    ++count;
  }
  auto acc = fold_rows(rows, count, jb.opener, e_min, q);
  return gridded("total initial", e_min, 2.0 * kPi / (static_cast<double>(q) * jb.opener.dtau), std::move(acc), true);
}

EnergyDistribution total_energy_final(const JointBranches& jb, double e_min, std::size_t q) {
  std::size_t count = 0;
  const auto rows = trapped_rows(jb, false, &count);
  auto acc = fold_rows(rows, count, jb.opener, e_min, q);
  const auto rel = released_rows(jb, std::exp(jb.log_scale), false);
  const auto extra = fold_rows(rel, jb.k_count(), jb.opener, e_min, q);
  for (std::size_t j = 0; j < q; ++j) acc[j] += extra[j];
  return gridded("total final", e_min, 2.0 * kPi / (static_cast<double>(q) * jb.opener.dtau), std::move(acc), true);
}

double l1_distance(const EnergyDistribution& a, const EnergyDistribution& b) {
  if (a.kind == DistributionKind::discrete && b.kind == DistributionKind::discrete) {
    std::map<double, double> diff;
    auto key = [](double e) { return std::round(e * 1e12) / 1e12; };
    for (std::size_t i = 0; i < a.energy.size(); ++i) diff[key(a.energy[i])] += a.probability[i];
    for (std::size_t i = 0; i < b.energy.size(); ++i) diff[key(b.energy[i])] -= b.probability[i];
    double s = 0.0;
    for (const auto& [e, v] : diff) s += std::abs(v);
    return s + std::abs(a.outside_mass - b.outside_mass);
  }
  if (a.kind != DistributionKind::gridded || b.kind != DistributionKind::gridded)
    throw std::invalid_argument("l1_distance: bin discrete distributions first");
  const double de = a.de;
  if (std::abs(a.de - b.de) <= 1e-12 * de && is_integer_multiple(b.e_min - a.e_min, de)) {
    const auto off = static_cast<long>(std::llround((b.e_min - a.e_min) / de));
    if (a.periodic && b.periodic && a.density.size() == b.density.size()) {
      const auto n = static_cast<long>(a.density.size());
      double s = 0.0;
      for (long j = 0; j < n; ++j) {
        const long jb = ((j - off) % n + n) % n;
        s += std::abs(a.density[static_cast<std::size_t>(j)] - b.density[static_cast<std::size_t>(jb)]);
      }
      return s * de;
    }
    const long lo = std::min(0L, off);
    const long hi = std::max(static_cast<long>(a.density.size()), off + static_cast<long>(b.density.size()));
    double s = 0.0;
    for (long j = lo; j < hi; ++j) {
      const double va = (j >= 0 && j < static_cast<long>(a.density.size())) ? a.density[static_cast<std::size_t>(j)] : 0.0;
      const long jb = j - off;
      const double vb = (jb >= 0 && jb < static_cast<long>(b.density.size())) ? b.density[static_cast<std::size_t>(jb)] : 0.0;
      s += std::abs(va - vb);
    }
    return s * de + std::abs(a.outside_mass - b.outside_mass);
  }
  // different grids: compare on a's grid
  double s = 0.0;
  for (std::size_t j = 0; j < a.density.size(); ++j) s += std::abs(a.density[j] - interp(b, a.grid_energy(j)));
  return s * de;
}

double total_variation(const EnergyDistribution& a, const EnergyDistribution& b) { return 0.5 * l1_distance(a, b); }

EnergyDistribution convolve(const EnergyDistribution& a, const EnergyDistribution& b) {
  const bool da = a.kind == DistributionKind::discrete;
  const bool db = b.kind == DistributionKind::discrete;
  if (da && db) {
    std::map<double, double> acc;
    for (std::size_t i = 0; i < a.energy.size(); ++i)
      for (std::size_t j = 0; j < b.energy.size(); ++j)
        acc[std::round((a.energy[i] + b.energy[j]) * 1e12) / 1e12] += a.probability[i] * b.probability[j];
    EnergyDistribution out;
    out.label = a.label + " * " + b.label;
    for (const auto& [e, p] : acc) {
      out.energy.push_back(e);
      out.probability.push_back(p);
    }
    return out;
  }
  if (!da && db) return convolve(b, a);
  if (da) {
    // discrete a shifted copies of gridded b
    if (a.energy.empty()) return gridded(a.label + " * " + b.label, b.e_min, b.de, std::vector<double>(b.density.size(), 0.0), b.periodic);
    const double lo = *std::min_element(a.energy.begin(), a.energy.end());
    const double hi = *std::max_element(a.energy.begin(), a.energy.end());
    bool resampled = false;
    EnergyDistribution out;
    if (b.periodic) {
      out = gridded(a.label + " * " + b.label, b.e_min, b.de, std::vector<double>(b.density.size(), 0.0), true);
    } else {
      const auto extra = static_cast<std::size_t>(std::ceil((hi - lo) / b.de)) + 1;
      out = gridded(a.label + " * " + b.label, b.e_min + lo, b.de, std::vector<double>(b.density.size() + extra, 0.0), false);
    }
    for (std::size_t i = 0; i < a.energy.size(); ++i) {
      const double shift = a.energy[i];
      if (!is_integer_multiple(shift - (out.e_min - b.e_min), b.de)) resampled = true;
      for (std::size_t j = 0; j < out.density.size(); ++j) out.density[j] += a.probability[i] * interp(b, out.grid_energy(j) - shift);
    }
    out.resampled = resampled;
    out.outside_mass = b.outside_mass;
    return out;
  }
  // gridded * gridded on a's spacing
  EnergyDistribution bb = b;
  bool resampled = false;
  if (std::abs(a.de - b.de) > 1e-12 * a.de) {
    const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(b.density.size()) * b.de / a.de));
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = interp(b, b.e_min + static_cast<double>(j) * a.de);
    bb = gridded(b.label, b.e_min, a.de, std::move(d), false);
    resampled = true;
  }
  std::vector<double> out(a.density.size() + bb.density.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.density.size(); ++i)
    for (std::size_t j = 0; j < bb.density.size(); ++j) out[i + j] += a.density[i] * bb.density[j] * a.de;
  auto res = gridded(a.label + " * " + b.label, a.e_min + bb.e_min, a.de, std::move(out), false);
  res.resampled = resampled;
  return res;
}

CharacteristicSeries characteristic_function(const EnergyDistribution& d, const std::vector<double>& tau) {
  CharacteristicSeries cs;
  cs.tau = tau;
  cs.value.resize(tau.size());
  if (d.kind == DistributionKind::discrete) {
    kernels::parallel::characteristic_sum(d.energy, d.probability, tau, cs.value);
  } else {
    std::vector<double> e(d.density.size());
    std::vector<double> w(d.density.size());
    for (std::size_t j = 0; j < e.size(); ++j) {
      e[j] = d.grid_energy(j);
      w[j] = d.density[j] * d.de;
    }
    kernels::parallel::characteristic_sum(e, w, tau, cs.value);
  }
  return cs;
}

CharacteristicSeries characteristic_function(const BoxState& state, double t, const std::vector<double>& tau) {
  CharacteristicSeries cs;
  cs.tau = tau;
  cs.value.resize(tau.size());
  const BoxState base = evolve_box(state, t);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    // |Psi(t + tau)> = e^{-i H tau} |Psi(t)>; tau may be negative here
    cplx sum = 0.0;
    for (int m = 1; m <= state.basis.mode_count; ++m) {
      const cplx a = base.amplitudes[static_cast<std::size_t>(m - 1)];
      if (a == cplx(0.0)) continue;
      const cplx later = a * std::polar(1.0, -state.basis.energy(m) * tau[i]);
      sum += std::conj(later) * a;
    }
    cs.value[i] = sum;
  }
  return cs;
}

cplx modular_energy_average(const EnergyDistribution& d, double tau) {
  return characteristic_function(d, std::vector<double>{tau}).value[0];
}

cplx modular_energy_average(const BoxState& state, double tau) {
  return characteristic_function(state, 0.0, std::vector<double>{tau}).value[0];
}

MomentVector moments(const EnergyDistribution& d, int max_order) {
  MomentVector mv;
  std::vector<double> e;
  std::vector<double> w;
  if (d.kind == DistributionKind::discrete) {
    e = d.energy;
    w = d.probability;
  } else {
    for (std::size_t j = 0; j < d.density.size(); ++j) {
      e.push_back(d.grid_energy(j));
      w.push_back(d.density[j] * d.de);
    }
  }
  mv.value.assign(static_cast<std::size_t>(std::max(max_order, 0)), 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i)
    if (w[i] > 0.0) {
      lo = std::min(lo, e[i]);
      hi = std::max(hi, e[i]);
    }
  for (int n = 1; n <= max_order; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += w[i] * std::pow(e[i], n);
    mv.value[static_cast<std::size_t>(n - 1)] = s;
  }
  if (max_order >= 1 && hi > lo) {
    const double cut = lo + 0.9 * (hi - lo);
    double top = 0.0;
    double all = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double c = w[i] * std::pow(std::abs(e[i]), max_order);
      all += c;
      if (e[i] >= cut) top += c;
    }
    if (all > 0.0 && top > 0.1 * all) {
      mv.heavy_tail = true;
      std::ostringstream msg;
      msg << "top decile of the energy range [" << cut << ", " << hi << "] carries " << std::setprecision(3)
          << 100.0 * top / all << "% of <E^" << max_order << ">";
      mv.warning = msg.str();
    }
  }
  return mv;
}

PhotonChange::PhotonChange(const JointBranches& jb) : branch_log_scale_(jb.log_scale) {
  const BoxState& st = jb.initial;
  const auto m_count = static_cast<std::size_t>(st.basis.mode_count);
  const std::size_t s_count = jb.tau_count();
  const std::size_t p_count = jb.window_count();

  trapped_energy_.resize(m_count);
  trapped_weight_.assign(m_count, 0.0);
  for (std::size_t m = 0; m < m_count; ++m) trapped_energy_[m] = st.basis.energy(static_cast<int>(m + 1));
  released_energy_.resize(jb.k_count());
  released_weight_.assign(jb.k_count(), 0.0);
  for (std::size_t j = 0; j < jb.k_count(); ++j) released_energy_[j] = 0.5 * jb.k[j] * jb.k[j];
  if (s_count == 0 || p_count == 0) return;
  if (jb.trapped_kick.empty()) throw std::invalid_argument("PhotonChange needs the trapped projections");

  for (std::size_t s = 0; s < s_count; ++s) {
    const double w = jb.opener.weight(s);
    for (std::size_t m = 0; m < m_count; ++m) trapped_weight_[m] += w * std::norm(jb.trapped_kick[s * m_count + m]);
    for (std::size_t j = 0; j < jb.k_count(); ++j)
      released_weight_[j] += w * jb.dk * std::norm(jb.released_k[s * jb.k_count() + j]);
  }

  const int M = st.basis.mode_count;
  const double two_na = 2.0 * st.basis.n_order * st.basis.unit_length;
  if (st.extended) {
    extended_ = true;
    const ExtendedModes& ext = *st.extended;
    bits_ = ext.product_bits;
    mode_ = ext.index;
    const std::size_t n = mode_.size();
    const ExtFloat pi = ExtFloat::pi(bits_);
    ExtFloat h = pi;
    h *= static_cast<double>(st.basis.n_order) * st.basis.unit_length;
    ExtFloat inv_sqrt_h(1.0, bits_);
    inv_sqrt_h /= h.sqrt();
    for (int m : mode_) {
      ExtFloat k(static_cast<double>(m), bits_);
      k /= ExtFloat(two_na, bits_);
      ExtFloat e = k * k;
      e *= 0.5;
      mode_energy_.push_back(e.to_double());
      energy_ext_.push_back(std::move(e));
    }
    // basis at window points
    std::vector<ExtFloat> phi;
    phi.reserve(n * p_count);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t p = 0; p < p_count; ++p) phi.push_back(box_mode_at_grid(mode_[a], jb.window_index[p], M, pi, inv_sqrt_h));
    const ExtFloat dx(jb.dx, bits_);
    const ExtFloat t0(st.elapsed, bits_);
    const ExtFloat dtau(jb.opener.dtau, bits_);
    // G[a][b] = 2 W_ab Gamma_c(E_a - E_b), symmetric
    std::vector<ExtFloat> g(n * n, ExtFloat(bits_));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ai = 0; ai < static_cast<std::ptrdiff_t>(n); ++ai) {
      const auto a = static_cast<std::size_t>(ai);
      for (std::size_t b = a; b < n; ++b) {
        ExtFloat w(bits_);
        for (std::size_t p = 0; p < p_count; ++p) w.fma_add(phi[a * p_count + p], phi[b * p_count + p]);
        w *= dx;
        // Gamma_c = sum_s rho_s cos(D (t0 + s dtau)) by the Chebyshev recurrence
        const ExtFloat d = energy_ext_[a] - energy_ext_[b];
        ExtFloat c_prev = (d * t0).sin_cos().second;
        ExtFloat gamma(bits_);
        ExtFloat rho(jb.opener.weight(0), bits_);
        gamma.fma_add(rho, c_prev);
        if (s_count > 1) {
          ExtFloat two_cos = (d * dtau).sin_cos().second;
          two_cos *= 2.0;
          ExtFloat c_cur = (d * (t0 + dtau)).sin_cos().second;
          for (std::size_t s = 1; s < s_count; ++s) {
            if (s % 64 == 0) {
              const ExtFloat ts(static_cast<double>(s), bits_);
              const ExtFloat tp(static_cast<double>(s - 1), bits_);
              c_cur = (d * (t0 + ts * dtau)).sin_cos().second;
              c_prev = (d * (t0 + tp * dtau)).sin_cos().second;
            }
            ExtFloat r(jb.opener.weight(s), bits_);
            gamma.fma_add(r, c_cur);
            ExtFloat next = two_cos * c_cur;
            next -= c_prev;
            c_prev = std::move(c_cur);
            c_cur = std::move(next);
          }
        }
        ExtFloat val = w * gamma;
        val *= 2.0;
        g[a * n + b] = val;
        g[b * n + a] = std::move(val);
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      ExtFloat sum(bits_);
      for (std::size_t b = 0; b < n; ++b) sum.fma_add(ext.amplitude[b], g[a * n + b]);
      ExtFloat y = ext.amplitude[a] * sum;
      y_.push_back(y.to_double());
      y_ext_.push_back(std::move(y));
    }
  } else {
    for (int m = 1; m <= M; ++m)
      if (st.amplitudes[static_cast<std::size_t>(m - 1)] != cplx(0.0)) mode_.push_back(m);
    const std::size_t n = mode_.size();
    for (int m : mode_) mode_energy_.push_back(st.basis.energy(m));
    const double inv_sqrt_h = 1.0 / std::sqrt(st.basis.half_length);
    const long period = 2L * (M + 1);
    std::vector<double> phi(n * p_count);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t p = 0; p < p_count; ++p) {
        const long r = (static_cast<long>(mode_[a]) * jb.window_index[p]) % period;
        phi[a * p_count + p] = std::sin(kPi * static_cast<double>(r) / (M + 1)) * inv_sqrt_h;
      }
    y_.assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      const cplx aa = st.amplitudes[static_cast<std::size_t>(mode_[a] - 1)];
      double sum = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const cplx ab = st.amplitudes[static_cast<std::size_t>(mode_[b] - 1)];
        double w = 0.0;
        for (std::size_t p = 0; p < p_count; ++p) w += phi[a * p_count + p] * phi[b * p_count + p];
        w *= jb.dx;
        cplx gamma = 0.0;
        const double d = mode_energy_[a] - mode_energy_[b];
        for (std::size_t s = 0; s < s_count; ++s) gamma += jb.opener.weight(s) * std::polar(1.0, d * jb.opener.tau[s]);
        sum += w * 2.0 * (std::conj(aa) * ab * gamma).real();
      }
      y_[a] = sum;
    }
  }
}

cplx PhotonChange::delta_characteristic(double tau) const {
  const double t[1] = {tau};
  cplx q[1];
  cplx r[1];
  kernels::serial::characteristic_sum(trapped_energy_, trapped_weight_, t, q);
  kernels::serial::characteristic_sum(released_energy_, released_weight_, t, r);
  cplx y = 0.0;
  if (extended_) {
    ExtFloat re(bits_);
    ExtFloat im(bits_);
    const ExtFloat te(tau, bits_);
    for (std::size_t a = 0; a < y_ext_.size(); ++a) {
      auto [s, c] = (energy_ext_[a] * te).sin_cos();
      re.fma_add(y_ext_[a], c);
      im.fma_add(y_ext_[a], s);
    }
    y = {re.to_double(), im.to_double()};
  } else {
    for (std::size_t a = 0; a < y_.size(); ++a) y += y_[a] * std::polar(1.0, mode_energy_[a] * tau);
  }
  return -y + q[0] + r[0];
}

std::vector<cplx> PhotonChange::delta_characteristic_lattice(double step, std::size_t count) const {
  std::vector<double> taus(count);
  for (std::size_t j = 0; j < count; ++j) taus[j] = static_cast<double>(j) * step;
  std::vector<cplx> q(count);
  std::vector<cplx> r(count);
  kernels::parallel::characteristic_sum(trapped_energy_, trapped_weight_, taus, q);
  kernels::parallel::characteristic_sum(released_energy_, released_weight_, taus, r);
  std::vector<cplx> out(count);
  if (!extended_) {
    for (std::size_t j = 0; j < count; ++j) {
      cplx y = 0.0;
      for (std::size_t a = 0; a < y_.size(); ++a) y += y_[a] * std::polar(1.0, mode_energy_[a] * taus[j]);
      out[j] = -y + q[j] + r[j];
    }
    return out;
  }
  const std::size_t n = y_ext_.size();
  std::vector<cplx> ysum(count, cplx(0.0));
  const ExtFloat st(step, bits_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t block = 0; block < static_cast<std::ptrdiff_t>((count + 63) / 64); ++block) {
    const std::size_t j0 = static_cast<std::size_t>(block) * 64;
    const std::size_t j1 = std::min(count, j0 + 64);
    std::vector<ExtFloat> re(j1 - j0, ExtFloat(bits_));
    std::vector<ExtFloat> im(j1 - j0, ExtFloat(bits_));
    for (std::size_t a = 0; a < n; ++a) {
      // z_j = Y e^{i E j step}, advanced by w = e^{i E step} within the block
      ExtFloat j0e(static_cast<double>(j0), bits_);
      auto [s0, c0] = (energy_ext_[a] * (j0e * st)).sin_cos();
      auto [sw, cw] = (energy_ext_[a] * st).sin_cos();
      ExtFloat zr = c0 * y_ext_[a];
      ExtFloat zi = s0 * y_ext_[a];
      for (std::size_t j = j0; j < j1; ++j) {
        re[j - j0] += zr;
        im[j - j0] += zi;
        ExtFloat nr = zr * cw;
        nr.fms_sub(zi, sw);
        ExtFloat ni = zr * sw;
        ni.fma_add(zi, cw);
        zr = std::move(nr);
        zi = std::move(ni);
      }
    }
    for (std::size_t j = j0; j < j1; ++j) ysum[j] = {re[j - j0].to_double(), im[j - j0].to_double()};
  }
  for (std::size_t j = 0; j < count; ++j) out[j] = -ysum[j] + q[j] + r[j];
  return out;
}

double PhotonChange::delta_trapped_moment(int order) const {
  double q = 0.0;
  for (std::size_t m = 0; m < trapped_energy_.size(); ++m) q += std::pow(trapped_energy_[m], order) * trapped_weight_[m];
  double y = 0.0;
  if (extended_) {
    ExtFloat acc(bits_);
    for (std::size_t a = 0; a < y_ext_.size(); ++a) acc.fma_add(y_ext_[a], energy_ext_[a].pow(static_cast<unsigned long>(order)));
    y = acc.to_double();
  } else {
    for (std::size_t a = 0; a < y_.size(); ++a) y += std::pow(mode_energy_[a], order) * y_[a];
  }
  return q - y;
}

double PhotonChange::delta_moment(int order) const {
  double r = 0.0;
  for (std::size_t j = 0; j < released_energy_.size(); ++j) r += std::pow(released_energy_[j], order) * released_weight_[j];
  return delta_trapped_moment(order) + r;
}

bool ConservationReport::all_pass() const {
  return l1_pass && fourier_pass && confinement_pass && catalyst_pass && unitarity_pass && moments_pass;
}

std::string ConservationReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(10);
  auto flag = [](bool b) { return b ? "true" : "false"; };
  os << "energy_step: " << energy_step << "\n";
  os << "l1_total: " << l1_total << "\n";
  os << "total_mass_initial: " << total_mass_initial << "\n";
  os << "total_mass_final: " << total_mass_final << "\n";
  os << "fourier_residual: " << fourier_residual << "\n";
  os << "max_photon_change: " << max_photon_change << "\n";
  os << "log10_max_photon_change: " << log10_max_photon_change << "\n";
  os << "changed_points: " << changed_points << "\n";
  os << "confinement_violations: " << confinement_violations << "\n";
  os << "max_opener_overlap_beyond_support: " << max_opener_beyond_support << "\n";
  os << "unitarity_error: " << unitarity_error << "\n";
  os << "log10_p_released: " << log10_p_released << "\n";
  for (std::size_t n = 0; n < moment_shift.size(); ++n) {
    os << "moment_" << n + 1 << "_initial: " << moment_initial[n] << "\n";
    os << "moment_" << n + 1 << "_shift: " << moment_shift[n] << "\n";
    os << "moment_" << n + 1 << "_relative_shift: " << moment_relative_shift[n] << "\n";
    os << "moment_" << n + 1 << "_tolerance: " << moment_tolerance[n] << "\n";
  }
  os << "photon_modular_change_at_2T: " << modular_change_2t << "\n";
  os << "trapped_mean_energy_shift: " << trapped_mean_shift << "\n";
  os << "pass_l1_total: " << flag(l1_pass) << "\n";
  os << "pass_fourier_residual: " << flag(fourier_pass) << "\n";
  os << "pass_confinement: " << flag(confinement_pass) << "\n";
  os << "pass_catalyst_window: " << flag(catalyst_pass) << "\n";
  os << "pass_unitarity: " << flag(unitarity_pass) << "\n";
  os << "pass_moments: " << flag(moments_pass) << "\n";
  os << "pass_all: " << flag(all_pass()) << "\n";
  for (const auto& n : notes) os << "note: " << n << "\n";
  return os.str();
}

ConservationReport verify_conservation(const ConservationInputs& in) {
  ConservationReport rep;
  const JointBranches& jb = *in.branches;
  const OpenerPacket& op = jb.opener;
  rep.log10_p_released = jb.log_p_released / std::log(10.0);
  rep.unitarity_error = std::abs(jb.p_trapped + jb.p_released - jb.initial.norm_squared() * op.norm_squared());
  rep.unitarity_pass = rep.unitarity_error <= in.unitarity_tolerance;

  const auto initial_photon = photon_energy_distribution(jb.initial);
  const auto mi = moments(initial_photon, in.max_moment);
  rep.moment_initial = mi.value;

  if (op.size() == 0) {
    rep.notes.push_back("no opener: the particle never interacts");
    rep.moment_shift.assign(static_cast<std::size_t>(in.max_moment), 0.0);
    rep.moment_relative_shift = rep.moment_shift;
    rep.moment_tolerance.assign(static_cast<std::size_t>(in.max_moment), 1e-6);
    rep.l1_pass = rep.fourier_pass = rep.confinement_pass = rep.catalyst_pass = rep.moments_pass = true;
    rep.unitarity_error = std::abs(jb.p_trapped - jb.initial.norm_squared());
    rep.unitarity_pass = rep.unitarity_error <= in.unitarity_tolerance;
    return rep;
  }

  // totals over one lattice period, margin split on both sides of the photon band
  const double period = 2.0 * kPi / op.dtau;
  const double k_top = kPi / jb.dx;
  const double e_top = 0.5 * k_top * k_top;
  if (period <= e_top) rep.notes.push_back("energy period of the sampled opener is shorter than the photon band; totals wrap");
  const double e_min = -0.5 * std::max(0.0, period - e_top);
  const std::size_t q = energy_grid_points(op, in.energy_step);
  const auto ti = total_energy_initial(jb, e_min, q);
  const auto tf = total_energy_final(jb, e_min, q);
  rep.energy_step = ti.de;
  rep.total_mass_initial = ti.total_mass();
  rep.total_mass_final = tf.total_mass();
  rep.l1_total = l1_distance(ti, tf);
  rep.l1_pass = rep.l1_total <= in.l1_tolerance;

  const PhotonChange change(jb);
  const double scale = std::exp(change.log_scale());
  const auto count = static_cast<std::size_t>(std::floor(in.tau_max / op.dtau + 1e-9)) + 1;
  const auto delta = change.delta_characteristic_lattice(op.dtau, count);
  double max_scaled = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double d = std::abs(delta[j]);
    max_scaled = std::max(max_scaled, d);
    const double phys = d * scale;
    const double omega = std::abs(opener_lattice_autocorrelation(op, static_cast<long>(j)));
    rep.fourier_residual = std::max(rep.fourier_residual, phys * omega);
    if (phys > in.change_threshold) {
      ++rep.changed_points;
      if (omega >= in.opener_threshold) ++rep.confinement_violations;
    }
  }
  rep.max_photon_change = max_scaled * scale;
  rep.log10_max_photon_change = max_scaled > 0.0 ? (std::log(max_scaled) + change.log_scale()) / std::log(10.0)
                                                 : -std::numeric_limits<double>::infinity();
  rep.fourier_pass = rep.fourier_residual <= in.fourier_tolerance;
  rep.confinement_pass = rep.confinement_violations == 0;

  double beyond = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double t = op.width + (in.tau_max - op.width) * i / 2000.0;
    beyond = std::max(beyond, std::abs(opener_autocorrelation(op, t)));
  }
  for (std::size_t j = 0; j < count; ++j)
    if (static_cast<double>(j) * op.dtau > op.width * (1.0 + 1e-12))
      beyond = std::max(beyond, std::abs(opener_lattice_autocorrelation(op, static_cast<long>(j))));
  rep.max_opener_beyond_support = beyond;
  rep.catalyst_pass = beyond <= 1e-12 && rep.confinement_pass;

  const std::size_t j2t = static_cast<std::size_t>(std::llround(2.0 * jb.duration / op.dtau));
  rep.modular_change_2t = std::abs(change.delta_characteristic(static_cast<double>(j2t) * op.dtau)) * scale;

  rep.moments_pass = true;
  for (int n = 1; n <= in.max_moment; ++n) {
    const double shift = change.delta_moment(n) * scale;
    const double init = mi.value[static_cast<std::size_t>(n - 1)];
    const double rel = init != 0.0 ? std::abs(shift) / std::abs(init) : std::abs(shift);
    const double tol = std::max(1e-6, 10.0 * jb.p_released * std::pow(in.alpha, 2 * n));
    rep.moment_shift.push_back(shift);
    rep.moment_relative_shift.push_back(rel);
    rep.moment_tolerance.push_back(tol);
    if (!(rel <= tol)) rep.moments_pass = false;
  }
  if (mi.heavy_tail) rep.notes.push_back("initial photon moments: " + mi.warning);
  if (jb.log_p_released < std::log(1e-16))
    rep.notes.push_back("release probability below double resolution: moment and characteristic-function shifts come "
                        "from the resolved difference, not from subtracting distributions");
  const double trapped_norm = jb.p_trapped;
  const double mean_i = mi.value.empty() ? 0.0 : mi.value[0];
  rep.trapped_mean_shift = (mean_i + change.delta_trapped_moment(1) * scale) / trapped_norm - mean_i;
  return rep;
}

}  // namespace superosc
