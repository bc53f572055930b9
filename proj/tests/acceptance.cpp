// One PASS/FAIL line per acceptance criterion, with the measured numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "superosc/scenario.hpp"

using namespace superosc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0.0 || dt < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s | %s | %.2fs", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt);
  if (limit_s > 0.0) std::printf(" (limit %.0fs%s)", limit_s, in_time ? "" : ", exceeded");
  std::printf("\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0, double g = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e, g);
  return buf;
}

ScenarioConfig defaults_with_window(double L) {
  ScenarioConfig c;
  c.window_half_width = L;
  return c;
}

}  // namespace

int main() {
  criterion(1, "superoscillation near the origin", 1.0, [] {
    const auto r100 = superosc_region_report({100, 4.0, 1.0}, 1.0);
    const auto r400 = superosc_region_report({400, 4.0, 1.0}, 1.0);
    const double kdev = std::max({std::abs(r100.wavenumber_min - 4.0), std::abs(r100.wavenumber_max - 4.0),
                                  std::abs(r400.wavenumber_min - 4.0), std::abs(r400.wavenumber_max - 4.0)}) / 4.0;
    const bool ok = r100.max_deviation <= 0.15 && r400.max_deviation <= 0.04 && kdev <= 0.02;
    return Outcome{ok, fmt("max|f e^{-iax}-1| N=100 %.4f (<=0.15), N=400 %.4f (<=0.04); local k rel. dev %.2e (<=0.02)",
                           r100.max_deviation, r400.max_deviation, kdev)};
  });

  criterion(2, "band limit of psi", 1.0, [] {
    const SuperoscSpec spec{100, 4.0, 1.0};
    const auto st = build_box_state(spec);
    // closed-form psi sampled at 8 points per wavelength of k = 1, then a discrete sine transform
    const auto basis = make_box_basis(spec, 2.0 * M_PI / 8.0);
    GridWavefunction g;
    g.dx = basis.grid_spacing();
    g.x_min = basis.grid_point(1);
    for (int i = 1; i <= basis.mode_count; ++i) g.values.emplace_back(eval_psi(st, basis.grid_point(i)));
    const auto proj = project_onto_basis(g, basis);
    double above = 0.0, total = 0.0;
    for (int m = 1; m <= basis.mode_count; ++m) {
      const double p = std::norm(proj.amplitudes[static_cast<std::size_t>(m - 1)]);
      total += p;
      if (basis.wavenumber(m) > 1.0 + 1e-12) above += p;
    }
    const auto embedded = embed_box_state(st, make_box_basis(spec, M_PI / 16.0), false);
    const double e_max = photon_energy_distribution(embedded).max_energy_with_mass(0.0);
    const bool ok = above / total < 1e-6 && e_max <= 0.5;
    return Outcome{ok, fmt("mass above |k|=1: %.3e (<1e-6); highest occupied energy %.6f (<=0.5)", above / total, e_max)};
  });

  criterion(3, "central-region mimicry", 10.0, [] {
    std::vector<double> worst;
    std::string detail;
    double worst100 = 1.0;
    for (int n : {100, 200, 400}) {
      const SuperoscSpec spec{n, 4.0, 1.0};
      const auto bs = embed_box_state(build_box_state(spec), make_box_basis(spec, M_PI / 16.0));
      double w = 1.0;
      for (double t : {0.0, 1.0, 2.5, 5.0}) {
        const double f = central_fidelity(bs, t, 1.0, 4.0);
        w = std::min(w, f);
        if (n == 100) detail += fmt("t=%.1f %.4f; ", t, f);
      }
      if (n == 100) worst100 = w;
      worst.push_back(w);
    }
    const bool mono = worst[1] >= worst[0] && worst[2] >= worst[1];
    detail += fmt("min over t<=5 by N=100,200,400: %.4f %.4f %.4f (need N=100 >= 0.95, nondecreasing)", worst[0], worst[1],
                  worst[2]);
    return Outcome{worst100 >= 0.95 && mono, detail};
  });

  ReleaseComparison base;
  criterion(4, "fake vs true release", 60.0, [&] {
    base = compare_release(build_scenario(ScenarioConfig{}));
    const bool ok = base.fidelity_fake_true >= 0.99 && base.approx_overlap_psi >= 0.98;
    return Outcome{ok, fmt("fidelity psi/sin %.3e (>=0.99); approximation vs exact psi %.3e (>=0.98), vs exact sin %.4f; "
                           "log10 P_down psi %.2f, P_down sin %.4f",
                           base.fidelity_fake_true, base.approx_overlap_psi, base.approx_overlap_sine,
                           base.psi.log_p_released / std::log(10.0), base.sine.p_released)};
  });

  ReleaseComparison wide;
  criterion(5, "high-energy emergence", 60.0, [&] {
    const auto narrow = compare_release(build_scenario(defaults_with_window(5.0)));
    wide = compare_release(build_scenario(defaults_with_window(15.0)));
    const auto& s = base.psi_stats;
    const bool modal = s.modal_bin_low <= 8.0 && 8.0 < s.modal_bin_high;
    const bool shrink = narrow.psi_stats.width > s.width && s.width > wide.psi_stats.width;
    const bool ok = modal && s.band_fraction >= 0.8 && shrink;
    return Outcome{ok, fmt("psi modal energy %.4f (bin must hold 8), peak |k| %.4f, band fraction %.4f (>=0.8), "
                           "width L=5,10,15: %.4f %.4f",
                           s.modal_energy, s.peak_k, s.band_fraction, narrow.psi_stats.width, s.width) +
                           fmt(" %.4f (decreasing); sin reference: modal %.4f, fraction %.4f", wide.psi_stats.width,
                               base.sine_stats.modal_energy, base.sine_stats.band_fraction)};
  });

  criterion(6, "opener invariance", 60.0, [&] {
    const bool ok = base.opener_tv_psi <= 0.1 && wide.opener_tv_psi < base.opener_tv_psi;
    return Outcome{ok, fmt("TV initial vs released-conditional: L=10 %.4f (<=0.1), L=15 %.4f (smaller); sin reference "
                           "L=10 %.4f, L=15 %.4f",
                           base.opener_tv_psi, wide.opener_tv_psi, base.opener_tv_sine, wide.opener_tv_sine)};
  });

  criterion(7, "standard conservation at the weak preset", 120.0, [] {
    const Scenario sc = build_scenario(ScenarioConfig::from_preset("weak"));
    const auto jb = run_branch(sc, sc.psi);
    const auto rep = verify_conservation(conservation_inputs(sc, jb));
    std::string detail = fmt("L1 total %.3e (<=1e-6); Fourier residual %.3e (<=1e-6); P_down %.3e", rep.l1_total,
                             rep.fourier_residual, jb.p_released);
    for (std::size_t n = 0; n < rep.moment_shift.size(); ++n)
      detail += fmt("; <E^%.0f> rel. shift %.3e (<=%.1e)", static_cast<double>(n + 1), rep.moment_relative_shift[n],
                    rep.moment_tolerance[n]);
    return Outcome{rep.l1_total <= 1e-6 && rep.fourier_residual <= 1e-6 && rep.moments_pass, detail};
  });

  criterion(8, "catalyst window", 10.0, [] {
    double beyond = 0.0;
    for (auto shape : {OpenerShape::top_hat, OpenerShape::bump}) {
      const auto op = make_opener(shape, 10.0, 0.0327);
      for (int i = 1; i <= 4000; ++i) beyond = std::max(beyond, std::abs(opener_autocorrelation(op, 10.0 + 30.0 * i / 4000.0)));
      for (long j = static_cast<long>(op.size()); j < 4 * static_cast<long>(op.size()); ++j)
        beyond = std::max(beyond, std::abs(opener_lattice_autocorrelation(op, j)));
    }
    const Scenario sc = build_scenario(ScenarioConfig{});
    const auto jb = run_branch(sc, sc.psi);
    const auto rep = verify_conservation(conservation_inputs(sc, jb));
    const bool ok = beyond <= 1e-12 && rep.confinement_pass;
    return Outcome{ok, fmt("sup_{tau>T} |<phi|phi(tau)>| %.1e (<=1e-12); tau with photon change > 1e-3: %.0f, of which "
                           "opener overlap >= 1e-2: %.0f; max photon change 10^%.1f",
                           beyond, static_cast<double>(rep.changed_points), static_cast<double>(rep.confinement_violations),
                           rep.log10_max_photon_change)};
  });

  criterion(9, "unitarity and no-interaction control", 0.0, [&] {
    double worst = 0.0;
    for (const auto* jb : {&base.psi, &base.sine, &wide.psi, &wide.sine})
      worst = std::max(worst, std::abs(jb->p_trapped + jb->p_released - 1.0));
    ScenarioConfig weak = ScenarioConfig::from_preset("weak");
    for (const char* shape : {"bump", "top_hat"}) {
      weak.opener_shape = shape;
      const Scenario sc = build_scenario(weak);
      for (const auto* s : {&sc.psi, &sc.reference}) {
        const auto jb = run_branch(sc, *s);
        worst = std::max(worst, std::abs(jb.p_trapped + jb.p_released - 1.0));
      }
    }
    // control: window of zero width
    weak.opener_shape = "bump";
    const Scenario sc = build_scenario(weak);
    const auto ctrl = exact_joint_evolution(sc.psi, sc.opener, ReleaseWindow{0.0}, sc.options);
    const std::size_t q = energy_grid_points(sc.opener, 0.05);
    auto in = conservation_inputs(sc, ctrl);
    const auto rep = verify_conservation(in);
    const double photon = l1_distance(photon_energy_distribution(ctrl.initial), photon_energy_distribution(ctrl));
    const double opener = total_variation(opener_energy_distribution(sc.opener, q),
                                          opener_energy_distribution(ctrl, q, BranchSelect::both));
    const double control = std::max({rep.l1_total, rep.max_photon_change, photon, opener});
    return Outcome{worst <= 1e-8 && control <= 1e-10,
                   fmt("max |P_up + P_down - 1| %.2e (<=1e-8); control run: total L1 %.1e, photon L1 %.1e, opener TV %.1e, "
                       "photon P~ change %.1e (<=1e-10)",
                       worst, rep.l1_total, photon, opener, rep.max_photon_change)};
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
