#include "superosc/commands.hpp"
#include "superosc/formats_text.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "superosc/errors.hpp"
#include "superosc/kernels.hpp"
#include "superosc/manifest.hpp"
#include "superosc/scenario.hpp"
#include "superosc/svg_plot.hpp"

namespace superosc {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct MissingArtifact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Csv {
 public:
  explicit Csv(const std::string& header) { os_ << header << "\n"; }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) os_ << ",";
      first = false;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os_ << buf;
    }
    os_ << "\n";
  }
  void raw(const std::string& line) { os_ << line << "\n"; }
  void save(const fs::path& path) const { write_file_atomic(path.string(), os_.str()); }

 private:
  std::ostringstream os_;
};

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path out_dir(const ScenarioConfig& c) { return fs::path(c.output_dir); }

std::string read_text(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void require_artifact(const ScenarioConfig& c, const std::string& name, const std::string& producer) {
  const fs::path p = out_dir(c) / name;
  if (!fs::exists(p)) throw MissingArtifact("missing " + p.string() + "; run '" + producer + "' first");
}

void require_prepared(const ScenarioConfig& c) {
  require_artifact(c, "config.txt", "prepare");
  const ScenarioConfig stored = ScenarioConfig::load((out_dir(c) / "config.txt").string(), ScenarioConfig{});
  if (stored.hash() != c.hash())
    throw MissingArtifact("artifacts in " + c.output_dir + " were prepared with config " + stored.hash() +
                          ", current config is " + c.hash() + "; rerun 'prepare'");
}

void finish_stage(const ScenarioConfig& c, const std::string& stage, const Stopwatch& sw,
                  const std::vector<std::pair<std::string, bool>>& checks) {
  RunManifest m = load_manifest(c.output_dir);
  if (m.config_hash != c.hash()) m = RunManifest{};
  m.config_hash = c.hash();
  for (const auto& [name, pass] : checks) m.set_check(name, pass);
  m.set_stage(stage, sw.seconds());
  write_manifest(c.output_dir, m);
}

int exit_for(const std::vector<std::pair<std::string, bool>>& checks) {
  int code = kExitOk;
  for (const auto& [name, pass] : checks)
    if (!pass) {
      std::cout << "FAIL " << name << "\n";
      code = kExitPhysics;
    }
  return code;
}

double log10_window_mass(const JointBranches& jb, std::size_t s) {
  double m = 0.0;
  for (std::size_t p = 0; p < jb.window_count(); ++p) m += std::norm(jb.window_samples[s * jb.window_count() + p]);
  m *= jb.dx;
  return m > 0.0 ? std::log10(m) + 2.0 * jb.log_scale / std::log(10.0) : -std::numeric_limits<double>::infinity();
}

void write_branch_dump(const fs::path& path, const JointBranches& jb) {
  const auto data = released_branch(jb);
  std::ostringstream os;
  os << "superosc-branch 1\n";
  os << "tau_count " << jb.tau_count() << "\n";
  os << "k_count " << jb.k_count() << "\n";
  os << "dtau " << g17(jb.opener.dtau) << "\n";
  os << "k_min " << g17(jb.k_count() ? jb.k.front() : 0.0) << "\n";
  os << "dk " << g17(jb.dk) << "\n";
  os << "duration " << g17(jb.duration) << "\n";
  os << "log_scale " << g17(jb.log_scale) << "\n";
  os << "layout tau-major complex128\nend\n";
  std::string blob = os.str();
  blob.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(cplx));
  write_file_atomic(path.string(), blob);
}

// released density per unit energy on k > 0 samples, both signs of k folded together
std::pair<std::vector<double>, std::vector<double>> released_energy_density(const JointBranches& jb) {
  std::vector<double> e;
  std::vector<double> d;
  const auto dens = jb.released_momentum_density();
  const std::size_t q = jb.k_count();
  for (std::size_t j = q / 2 + 1; j < q; ++j) {
    const double k = jb.k[j];
    e.push_back(0.5 * k * k);
    d.push_back((dens[j] + dens[q - j]) / k);
  }
  return {e, d};
}

void normalize_peak(std::vector<double>& y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, v);
  if (m > 0.0)
    for (auto& v : y) v /= m;
}

}  // namespace

int cmd_prepare(const ScenarioConfig& c) {
  Stopwatch sw;
  const Scenario sc = build_scenario(c);
  const fs::path dir = out_dir(c);
  fs::create_directories(dir);
  write_file_atomic((dir / "config.txt").string(), c.to_text());
  write_file_atomic((dir / "FORMATS.md").string(), kFormatsText);

  {
    std::ostringstream os;
    write_mode_table_csv(os, binomial_coefficients(sc.spec));
    write_file_atomic((dir / "modes.csv").string(), os.str());
  }
  Csv amps("m,k_m,E_m,re,im");
  for (int m = 1; m <= sc.basis.mode_count; ++m) {
    const cplx a = sc.psi.amplitudes[static_cast<std::size_t>(m - 1)];
    if (a == cplx(0.0)) continue;
    amps.row({static_cast<double>(m), sc.basis.wavenumber(m), sc.basis.energy(m), a.real(), a.imag()});
  }
  amps.save(dir / "box_amplitudes.csv");

  const GridWavefunction grid = sample_on_basis_grid(sc.psi);
  {
    std::ostringstream os;
    write_grid_csv(os, grid);
    write_file_atomic((dir / "psi_grid.csv").string(), os.str());
  }
  write_grid_binary((dir / "psi_grid.bin").string(), grid);

  Csv op("s,tau,q,phi");
  for (std::size_t s = 0; s < sc.opener.size(); ++s)
    op.row({static_cast<double>(s), sc.opener.tau[s], -sc.opener.tau[s], sc.opener.values[s]});
  op.save(dir / "opener.csv");

  const double radius = std::min(1.0, sc.spec.half_length());
  const RegionReport region = superosc_region_report(sc.spec, radius);
  const double norm = sc.psi.norm_squared();
  std::ostringstream summary;
  summary << "config_hash: " << c.hash() << "\n";
  summary << "mode_count: " << sc.basis.mode_count << "\n";
  summary << "grid_spacing: " << g17(sc.basis.grid_spacing()) << "\n";
  summary << "box_half_length: " << g17(sc.spec.half_length()) << "\n";
  summary << "psi_norm: " << g17(norm) << "\n";
  summary << "log_norm_constant: " << g17(sc.state.log_norm_constant) << "\n";
  summary << "region_radius: " << g17(region.radius) << "\n";
  summary << "region_max_deviation: " << g17(region.max_deviation) << "\n";
  summary << "region_wavenumber_min: " << g17(region.wavenumber_min) << "\n";
  summary << "region_wavenumber_max: " << g17(region.wavenumber_max) << "\n";
  summary << "sqrt_n_scale: " << g17(region.sqrt_n_scale) << "\n";
  summary << "opener_samples: " << sc.opener.size() << "\n";
  summary << "opener_dtau: " << g17(sc.opener.dtau) << "\n";
  summary << "opener_norm: " << g17(sc.opener.norm_squared()) << "\n";
  summary << "window_inside_superoscillation_region: "
          << (sc.window.inside_superoscillation_region(sc.spec) ? "true" : "false") << "\n";
  write_file_atomic((dir / "prepare_summary.txt").string(), summary.str());

  // whole box on a log scale, superoscillatory region shaded
  Plot full;
  full.title = "|psi(x)| in the box (N = " + std::to_string(c.n_order) + ", alpha = " + g17(c.alpha) + ")";
  full.x_label = "x / a";
  full.y_label = "|psi|";
  full.log_y = true;
  PlotSeries ps{"|psi|", {}, {}, "#1f77b4", false};
  const double shift = std::exp(grid.log_scale);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    ps.x.push_back(grid.x(i));
    ps.y.push_back(std::abs(grid.values[i]) * shift);
  }
  full.series.push_back(ps);
  full.spans.push_back({-sc.spec.sqrt_n_scale(), sc.spec.sqrt_n_scale(), "#ffe08a"});
  write_svg((dir / "fig1_state.svg").string(), full, c.hash());

  Plot centre;
  centre.title = "central region: -psi Norm / 2 against sin(alpha x)";
  centre.x_label = "x / a";
  centre.y_label = "amplitude";
  const double r = std::min(2.0 * sc.spec.sqrt_n_scale(), sc.spec.half_length());
  PlotSeries pc{"-psi Norm / 2", {}, {}, "#1f77b4", false};
  PlotSeries pr{"sin(alpha x)", {}, {}, "#d62728", true};
  for (int i = 0; i <= 2000; ++i) {
    const double x = -r + 2.0 * r * i / 2000.0;
    const auto [lm, arg] = eval_log_f(sc.spec, x);
    pc.x.push_back(x);
    pc.y.push_back(std::exp(lm) * std::sin(arg));
    pr.x.push_back(x);
    pr.y.push_back(std::sin(c.alpha * x));
  }
  centre.series = {pc, pr};
  centre.spans.push_back({-sc.spec.sqrt_n_scale(), sc.spec.sqrt_n_scale(), "#ffe08a"});
  write_svg((dir / "fig1_center.svg").string(), centre, c.hash());

  std::cout << "prepared " << dir.string() << " (config " << c.hash() << "), psi norm " << g17(norm) << "\n";
  const std::vector<std::pair<std::string, bool>> checks = {{"prepare.psi_norm", std::abs(norm - 1.0) <= 1e-10}};
  finish_stage(c, "prepare", sw, checks);
  return exit_for(checks);
}

int cmd_run(const ScenarioConfig& c) {
  Stopwatch sw;
  require_prepared(c);
  const Scenario sc = build_scenario(c);
  const fs::path dir = out_dir(c);
  const ReleaseComparison rc = compare_release(sc);

  const auto dp = rc.psi.released_momentum_density();
  const auto ds = rc.sine.released_momentum_density();
  std::vector<double> dh(rc.psi.k_count());
  double hm = 0.0;
  for (std::size_t j = 0; j < dh.size(); ++j) {
    dh[j] = std::norm(truncated_spectrum(c.alpha, c.window_half_width, rc.psi.k[j]));
    hm += dh[j] * rc.psi.dk;
  }
  Csv spec("k,density_psi,density_sine,density_truncated");
  for (std::size_t j = 0; j < dh.size(); ++j) spec.row({rc.psi.k[j], dp[j], ds[j], hm > 0.0 ? dh[j] / hm : 0.0});
  spec.save(dir / "released_spectrum.csv");

  const auto [ep, dep] = released_energy_density(rc.psi);
  const auto [es, des] = released_energy_density(rc.sine);
  Csv en("E,density_psi,density_sine");
  for (std::size_t j = 0; j < ep.size(); ++j) en.row({ep[j], dep[j], des[j]});
  en.save(dir / "released_energy.csv");

  Csv wm("tau,log10_window_mass_psi,log10_window_mass_sine");
  for (std::size_t s = 0; s < rc.psi.tau_count(); ++s)
    wm.row({rc.psi.opener.tau[s], log10_window_mass(rc.psi, s), log10_window_mass(rc.sine, s)});
  wm.save(dir / "window_mass.csv");

  write_branch_dump(dir / "released_branch_psi.bin", rc.psi);
  write_branch_dump(dir / "released_branch_sine.bin", rc.sine);

  const double ln10 = std::log(10.0);
  const double unit_psi = std::abs(rc.psi.p_trapped + rc.psi.p_released - sc.opener.norm_squared());
  const double unit_sine = std::abs(rc.sine.p_trapped + rc.sine.p_released - sc.opener.norm_squared());
  std::ostringstream s;
  s << "config_hash: " << c.hash() << "\n";
  s << "log10_p_released_psi: " << g17(rc.psi.log_p_released / ln10) << "\n";
  s << "p_trapped_psi: " << g17(rc.psi.p_trapped) << "\n";
  s << "log10_max_window_mass_psi: " << g17(rc.psi.log_max_window_mass / ln10) << "\n";
  s << "p_released_sine: " << g17(rc.sine.p_released) << "\n";
  s << "p_trapped_sine: " << g17(rc.sine.p_trapped) << "\n";
  s << "unitarity_error_psi: " << g17(unit_psi) << "\n";
  s << "unitarity_error_sine: " << g17(unit_sine) << "\n";
  s << "fidelity_fake_true: " << g17(rc.fidelity_fake_true) << "\n";
  s << "approx_overlap_psi: " << g17(rc.approx_overlap_psi) << "\n";
  s << "approx_overlap_sine: " << g17(rc.approx_overlap_sine) << "\n";
  for (const auto& [tag, st] : {std::pair{"psi", rc.psi_stats}, std::pair{"sine", rc.sine_stats}}) {
    s << "peak_k_" << tag << ": " << g17(st.peak_k) << "\n";
    s << "modal_energy_" << tag << ": " << g17(st.modal_energy) << "\n";
    s << "band_fraction_" << tag << ": " << g17(st.band_fraction) << "\n";
    s << "spectral_width_" << tag << ": " << g17(st.width) << "\n";
  }
  s << "opener_tv_psi: " << g17(rc.opener_tv_psi) << "\n";
  s << "opener_tv_sine: " << g17(rc.opener_tv_sine) << "\n";
  write_file_atomic((dir / "run_summary.txt").string(), s.str());

  Plot fig;
  fig.title = "released momentum density (conditional on release)";
  fig.x_label = "k";
  fig.y_label = "density";
  fig.series = {{"psi", rc.psi.k, dp, "#1f77b4", false},
                {"sin(alpha x)", rc.psi.k, ds, "#d62728", true},
                {"|h(k)|^2", rc.psi.k, dh, "#2ca02c", true}};
  for (auto& v : fig.series[2].y) v = hm > 0.0 ? v / hm : 0.0;
  write_svg((dir / "released_spectrum.svg").string(), fig, c.hash());

  std::printf("P_down(psi) = 10^%.4f   P_down(sin) = %.6g   fake/true fidelity = %.6f\n", rc.psi.log_p_released / ln10,
              rc.sine.p_released, rc.fidelity_fake_true);
  const double dk = rc.psi.dk;
  const std::vector<std::pair<std::string, bool>> checks = {
      {"run.unitarity_psi", unit_psi <= 1e-8},
      {"run.unitarity_sine", unit_sine <= 1e-8},
      {"run.released_peak_at_alpha", std::abs(rc.psi_stats.peak_k - c.alpha) <= dk},
      {"run.fake_true_fidelity", rc.fidelity_fake_true >= 0.99},
      {"run.approximation_overlap", rc.approx_overlap_psi >= 0.98},
  };
  finish_stage(c, "run", sw, checks);
  return exit_for(checks);
}

int cmd_analyze(const ScenarioConfig& c) {
  Stopwatch sw;
  require_prepared(c);
  require_artifact(c, "run_summary.txt", "run");
  const Scenario sc = build_scenario(c);
  const fs::path dir = out_dir(c);
  const JointBranches jb = run_branch(sc, sc.psi);
  const double de = c.effective_energy_step();

  const auto photon_i = photon_energy_distribution(sc.psi);
  const auto photon_f = photon_energy_distribution(jb);
  Csv pi("E,probability");
  for (std::size_t i = 0; i < photon_i.energy.size(); ++i) pi.row({photon_i.energy[i], photon_i.probability[i]});
  pi.save(dir / "photon_energy_initial.csv");
  Csv pf("E,probability");
  for (std::size_t i = 0; i < photon_f.energy.size(); ++i) pf.row({photon_f.energy[i], photon_f.probability[i]});
  pf.save(dir / "photon_energy_final.csv");

  const double k_max = jb.k_count() ? std::abs(jb.k.front()) : 1.0;
  const auto rel_hist = released_energy_histogram(jb, de, 0.5 * k_max * k_max + de);
  Csv rh("E,density");
  for (std::size_t j = 0; j < rel_hist.density.size(); ++j) rh.row({rel_hist.grid_energy(j), rel_hist.density[j]});
  rh.save(dir / "photon_energy_released_histogram.csv");

  const std::size_t q = energy_grid_points(sc.opener, de);
  const auto oi = opener_energy_distribution(sc.opener, q);
  const auto orl = opener_energy_distribution(jb, q, BranchSelect::released);
  const auto ob = opener_energy_distribution(jb, q, BranchSelect::both);
  Csv oc("p,initial,released,both");
  for (std::size_t j = 0; j < q; ++j) oc.row({oi.grid_energy(j), oi.density[j], orl.density[j], ob.density[j]});
  oc.save(dir / "opener_energy.csv");
  const double tv = total_variation(oi, orl);

  const ConservationInputs in = conservation_inputs(sc, jb);
  ConservationReport rep = verify_conservation(in);

  // characteristic functions on the opener lattice
  const PhotonChange change(jb);
  const auto count = static_cast<std::size_t>(std::floor(in.tau_max / sc.opener.dtau + 1e-9)) + 1;
  const auto delta = change.delta_characteristic_lattice(sc.opener.dtau, count);
  std::vector<double> taus(count);
  for (std::size_t j = 0; j < count; ++j) taus[j] = static_cast<double>(j) * sc.opener.dtau;
  const auto chi = characteristic_function(photon_i, taus);
  Csv cc("tau,photon_initial_re,photon_initial_im,log10_abs_photon_change,opener_overlap");
  PlotSeries s_change{"log10 |change of photon P~|", {}, {}, "#d62728", false};
  PlotSeries s_open{"log10 |opener P~|", {}, {}, "#1f77b4", false};
  for (std::size_t j = 0; j < count; ++j) {
    const double a = std::abs(delta[j]);
    const double lg = a > 0.0 ? std::log10(a) + change.log_scale() / std::log(10.0) : -400.0;
    const double ov = opener_lattice_autocorrelation(sc.opener, static_cast<long>(j)).real();
    cc.row({taus[j], chi.value[j].real(), chi.value[j].imag(), lg, ov});
    s_change.x.push_back(taus[j]);
    s_change.y.push_back(lg);
    s_open.x.push_back(taus[j]);
    s_open.y.push_back(std::abs(ov) > 0.0 ? std::log10(std::abs(ov)) : -400.0);
  }
  cc.save(dir / "characteristic.csv");

  const auto sym = symmetric_tau_grid(in.tau_max, sc.opener.dtau);
  const bool axioms = check_axioms(characteristic_function(photon_i, sym)).ok() &&
                      check_axioms(characteristic_function(photon_f, sym)).ok() &&
                      check_axioms(characteristic_function(oi, sym)).ok();

  const double period = 2.0 * kPi / sc.opener.dtau;
  const double e_top = 0.5 * std::pow(kPi / jb.dx, 2);
  const double e_min = -0.5 * std::max(0.0, period - e_top);
  const std::size_t qt = energy_grid_points(sc.opener, de);
  const auto ti = total_energy_initial(jb, e_min, qt);
  const auto tf = total_energy_final(jb, e_min, qt);
  Csv tc("E,initial,final");
  for (std::size_t j = 0; j < qt; ++j) tc.row({ti.grid_energy(j), ti.density[j], tf.density[j]});
  tc.save(dir / "total_energy.csv");

  const double target = 0.5 * c.alpha * c.alpha;
  SpectrumStats st = released_spectrum_stats(jb, c.alpha, c.window_half_width, de);
  const double above_half = photon_i.mass_above(0.5);
  std::string text = rep.to_text();
  text += "opener_tv_released: " + g17(tv) + "\n";
  text += "initial_photon_mass_above_half: " + g17(above_half) + "\n";
  text += "final_released_modal_energy: " + g17(st.modal_energy) + "\n";
  text += "characteristic_axioms: " + std::string(axioms ? "true" : "false") + "\n";
  write_file_atomic((dir / "conservation_report.txt").string(), text);

  // photon energy: initial histogram and released density, each scaled to peak 1
  Plot f2;
  f2.title = "photon energy: initial vs released (each scaled to peak 1)";
  f2.x_label = "E";
  f2.y_label = "density / peak";
  const auto init_hist = bin_distribution(photon_i, 0.0, de, static_cast<std::size_t>(std::ceil(0.5 * k_max * k_max / de)) + 1);
  PlotSeries h0{"initial", {}, init_hist.density, "#1f77b4", false};
  for (std::size_t j = 0; j < init_hist.density.size(); ++j) h0.x.push_back(init_hist.grid_energy(j));
  normalize_peak(h0.y);
  auto [re, rd] = released_energy_density(jb);
  normalize_peak(rd);
  f2.series = {h0, {"released", re, rd, "#d62728", false}};
  f2.spans.push_back({target - 0.5 * de, target + 0.5 * de, "#cccccc"});
  write_svg((dir / "fig2_photon_energy.svg").string(), f2, c.hash());

  Plot f3;
  f3.title = "opener energy distribution";
  f3.x_label = "p";
  f3.y_label = "density";
  PlotSeries o0{"initial", {}, oi.density, "#1f77b4", false};
  for (std::size_t j = 0; j < q; ++j) o0.x.push_back(oi.grid_energy(j));
  PlotSeries o1{"released (conditional)", o0.x, orl.density, "#d62728", true};
  PlotSeries o2{"final, both branches", o0.x, ob.density, "#2ca02c", true};
  f3.series = {o0, o1, o2};
  write_svg((dir / "fig3_opener.svg").string(), f3, c.hash());

  Plot fc;
  fc.title = "characteristic functions on the opener lattice";
  fc.x_label = "tau";
  fc.y_label = "log10 modulus";
  fc.series = {s_change, s_open};
  for (auto& s : fc.series)
    for (auto& v : s.y) v = std::max(v, -320.0);
  write_svg((dir / "fig_characteristic.svg").string(), fc, c.hash());

  std::cout << text;
  const std::vector<std::pair<std::string, bool>> checks = {
      {"analyze.l1_total", rep.l1_pass},
      {"analyze.fourier_residual", rep.fourier_pass},
      {"analyze.confinement", rep.confinement_pass},
      {"analyze.catalyst_window", rep.catalyst_pass},
      {"analyze.unitarity", rep.unitarity_pass},
      {"analyze.moments", rep.moments_pass},
      {"analyze.characteristic_axioms", axioms},
      {"analyze.initial_support_below_half", above_half == 0.0},
      {"analyze.final_modal_bin_at_alpha_sq_half", st.modal_bin_low <= target && target < st.modal_bin_high},
      {"analyze.opener_tv", tv <= 0.1},
  };
  finish_stage(c, "analyze", sw, checks);
  return exit_for(checks);
}

int cmd_sweep(const ScenarioConfig& c) {
  Stopwatch sw;
  c.validate();
  const fs::path dir = out_dir(c);
  fs::create_directories(dir);
  Csv table(c.sweep_axis == "N" ? "N,fidelity_fake_true,approx_overlap_psi,spectral_width_psi,spectral_width_sine,"
                                  "band_fraction_psi,opener_tv_psi,opener_tv_sine,log10_p_released_psi,status"
                                : "L,fidelity_fake_true,approx_overlap_psi,spectral_width_psi,spectral_width_sine,"
                                  "band_fraction_psi,opener_tv_psi,opener_tv_sine,log10_p_released_psi,status");
  std::vector<double> axis;
  std::vector<double> fid;
  std::vector<double> width;
  for (double v : c.sweep_points()) {
    ScenarioConfig pc = c;
    if (c.sweep_axis == "N") pc.n_order = static_cast<int>(std::lround(v));
    else pc.window_half_width = v;
    char head[64];
    std::snprintf(head, sizeof head, "%.17g", v);
    try {
      const ReleaseComparison rc = compare_release(build_scenario(pc));
      std::ostringstream row;
      row << head;
      for (double x : {rc.fidelity_fake_true, rc.approx_overlap_psi, rc.psi_stats.width, rc.sine_stats.width,
                       rc.psi_stats.band_fraction, rc.opener_tv_psi, rc.opener_tv_sine,
                       rc.psi.log_p_released / std::log(10.0)})
        row << "," << g17(x);
      row << ",ok";
      table.raw(row.str());
      axis.push_back(v);
      fid.push_back(rc.fidelity_fake_true);
      width.push_back(rc.psi_stats.width);
      std::cout << c.sweep_axis << " = " << head << ": fidelity " << g17(rc.fidelity_fake_true) << ", width "
                << g17(rc.psi_stats.width) << "\n";
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (auto& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      table.raw(std::string(head) + ",nan,nan,nan,nan,nan,nan,nan,nan,error: " + msg);
      std::cout << c.sweep_axis << " = " << head << ": error: " << e.what() << "\n";
    }
  }
  table.save(dir / "sweep.csv");

  // monotone within noise
  bool monotone = true;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (c.sweep_axis == "N" && fid[i] < fid[i - 1] - 1e-3) monotone = false;
    if (c.sweep_axis == "L" && width[i] > width[i - 1] * (1.0 + 1e-3)) monotone = false;
  }
  Plot p;
  p.title = "sweep over " + c.sweep_axis;
  p.x_label = c.sweep_axis;
  p.y_label = c.sweep_axis == "N" ? "fake/true fidelity" : "released spectral width";
  p.series = {{c.sweep_axis == "N" ? "fidelity" : "width", axis, c.sweep_axis == "N" ? fid : width, "#1f77b4", false}};
  write_svg((dir / "sweep.svg").string(), p, c.hash());
  const std::vector<std::pair<std::string, bool>> checks = {
      {"sweep.monotone_" + c.sweep_axis, monotone},
      {"sweep.all_points_ok", axis.size() == c.sweep_points().size()}};
  finish_stage(c, "sweep", sw, checks);
  return exit_for(checks);
}

int cmd_report(const ScenarioConfig& c) {
  Stopwatch sw;
  require_artifact(c, kManifestName, "prepare");
  const fs::path dir = out_dir(c);
  RunManifest m = load_manifest(c.output_dir);
  std::ostringstream os;
  os << "# Run report\n\nconfig hash: `" << m.config_hash << "`\n\n## Checks\n\n| check | result |\n|---|---|\n";
  for (const auto& [name, pass] : m.checks) os << "| " << name << " | " << (pass ? "pass" : "FAIL") << " |\n";
  os << "\n## Stages\n\n| stage | seconds |\n|---|---|\n";
  for (const auto& [name, sec] : m.stage_seconds) os << "| " << name << " | " << g17(sec) << " |\n";
  for (const char* f : {"prepare_summary.txt", "run_summary.txt", "conservation_report.txt"}) {
    if (!fs::exists(dir / f)) continue;
    os << "\n## " << f << "\n\n```\n" << read_text(dir / f) << "```\n";
  }
  if (fs::exists(dir / "sweep.csv")) os << "\n## sweep.csv\n\n```\n" << read_text(dir / "sweep.csv") << "```\n";
  write_file_atomic((dir / "report.md").string(), os.str());
  std::cout << os.str();
  m.set_stage("report", sw.seconds());
  write_manifest(c.output_dir, m);
  std::vector<std::pair<std::string, bool>> checks(m.checks.begin(), m.checks.end());
  return checks.empty() ? kExitPhysics : exit_for(checks);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"superoscillation energy-conservation laboratory"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out;
  std::string preset;
  int threads = 0;
  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--out", out, "output directory");
  app.add_option("--preset", preset, "parameter preset")->check(CLI::IsMember({"default", "weak"}));
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  std::map<std::string, int (*)(const ScenarioConfig&)> table = {
      {"prepare", cmd_prepare}, {"run", cmd_run}, {"analyze", cmd_analyze}, {"sweep", cmd_sweep}, {"report", cmd_report}};
  const std::map<std::string, std::string> help = {
      {"prepare", "build psi, the sin(alpha x) reference and the opener; write arrays and figure 1"},
      {"run", "exact joint evolution for psi and sin(alpha x); released spectra and branch dumps"},
      {"analyze", "energy distributions, characteristic functions, conservation report and figures"},
      {"sweep", "convergence table over N or L (sweep_axis, sweep_values)"},
      {"report", "collect summaries and checks into report.md"}};
  for (const auto& [name, fn] : table) app.add_subcommand(name, help.at(name))->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    // preset precedence: --preset, then SUPEROSC_PRESET, then a preset line in the file
    std::string base = preset;
    if (base.empty())
      if (const char* env = std::getenv("SUPEROSC_PRESET")) base = env;
    ScenarioConfig cfg = ScenarioConfig::from_preset(base.empty() ? "default" : base);
    if (!config_path.empty()) cfg = ScenarioConfig::load(config_path, cfg, base.empty());
    cfg.apply_environment();
    if (!out.empty()) cfg.output_dir = out;
    cfg.validate();
    kernels::set_thread_count(threads);
    const std::string cmd = app.get_subcommands().front()->get_name();
    return table.at(cmd)(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MissingArtifact& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace superosc
