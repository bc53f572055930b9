#include "superosc/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "superosc/errors.hpp"
#include "superosc/opener_interaction.hpp"

namespace superosc {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

const char* const kKeys[] = {"preset",       "n_order",   "alpha",       "unit_length",    "window_half_width",
                             "duration",     "opener_shape", "opener_width", "dx",          "dtau",
                             "energy_step",  "k_padding", "tau_max_factor", "output_dir", "sweep_axis",
                             "sweep_values"};

const char* unit_comment(const std::string& key) {
  if (key == "n_order") return "# N, number of factors in f";
  if (key == "alpha") return "# superoscillation wavenumber, units of 1/a";
  if (key == "unit_length") return "# a";
  if (key == "window_half_width") return "# L, release window |x| <= L, units of a";
  if (key == "duration") return "# T, final time";
  if (key == "opener_shape") return "# bump | top_hat | none";
  if (key == "opener_width") return "# opener support length in q; < 0 means T";
  if (key == "dx") return "# box grid spacing; 0 means pi/(4 alpha)";
  if (key == "dtau") return "# opener sample spacing; 0 means automatic";
  if (key == "energy_step") return "# total-energy grid step (upper bound); 0 means min(1/T, 2pi/L)/4";
  if (key == "k_padding") return "# released k grid oversampling";
  if (key == "tau_max_factor") return "# characteristic series up to factor * T";
  if (key == "output_dir") return "# artifacts directory";
  if (key == "sweep_axis") return "# L or N";
  if (key == "sweep_values") return "# comma separated";
  return "";
}

}  // namespace

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ScenarioConfig ScenarioConfig::from_preset(const std::string& name) {
  ScenarioConfig c;
  if (name == "default") return c;
  if (name == "weak") {
    c.preset = "weak";
    c.n_order = 25;
    c.alpha = 2.0;
    c.window_half_width = 5.0;
    c.duration = 5.0;
    c.sweep_values = "3,4,5";
    return c;
  }
  throw ConfigError("preset: unknown preset '" + name + "' (expected default or weak)");
}

void ScenarioConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "preset") preset = v;
  else if (key == "n_order") n_order = to_int(key, v);
  else if (key == "alpha") alpha = to_double(key, v);
  else if (key == "unit_length") unit_length = to_double(key, v);
  else if (key == "window_half_width") window_half_width = to_double(key, v);
  else if (key == "duration") duration = to_double(key, v);
  else if (key == "opener_shape") opener_shape = v;
  else if (key == "opener_width") opener_width = to_double(key, v);
  else if (key == "dx") dx = to_double(key, v);
  else if (key == "dtau") dtau = to_double(key, v);
  else if (key == "energy_step") energy_step = to_double(key, v);
  else if (key == "k_padding") k_padding = to_int(key, v);
  else if (key == "tau_max_factor") tau_max_factor = to_double(key, v);
  else if (key == "output_dir") output_dir = v;
  else if (key == "sweep_axis") sweep_axis = v;
  else if (key == "sweep_values") sweep_values = v;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

std::map<std::string, std::string> ScenarioConfig::values() const {
  return {{"preset", preset},
          {"n_order", std::to_string(n_order)},
          {"alpha", fmt(alpha)},
          {"unit_length", fmt(unit_length)},
          {"window_half_width", fmt(window_half_width)},
          {"duration", fmt(duration)},
          {"opener_shape", opener_shape},
          {"opener_width", fmt(opener_width)},
          {"dx", fmt(dx)},
          {"dtau", fmt(dtau)},
          {"energy_step", fmt(energy_step)},
          {"k_padding", std::to_string(k_padding)},
          {"tau_max_factor", fmt(tau_max_factor)},
          {"output_dir", output_dir},
          {"sweep_axis", sweep_axis},
          {"sweep_values", sweep_values}};
}

ScenarioConfig ScenarioConfig::parse(const std::string& text, ScenarioConfig base, bool honor_preset) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  // a preset line resets the base before the other keys apply
  std::vector<std::pair<std::string, std::string>> entries;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hashpos = line.find('#');
    if (hashpos != std::string::npos) line = line.substr(0, hashpos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : entries)
    if (k == "preset" && honor_preset) base = from_preset(v);
  for (const auto& [k, v] : entries)
    if (k != "preset") base.set(k, v);
  return base;
}

ScenarioConfig ScenarioConfig::load(const std::string& path, ScenarioConfig base, bool honor_preset) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), std::move(base), honor_preset);
}

std::vector<std::string> ScenarioConfig::apply_environment() {
  std::vector<std::string> used;
  for (const char* key : kKeys) {
    std::string env = "SUPEROSC_";
    for (const char* p = key; *p; ++p) env += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (const char* v = std::getenv(env.c_str())) {
      if (std::string(key) == "preset") continue;
      set(key, v);
      used.emplace_back(key);
    }
  }
  return used;
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream os;
  const auto v = values();
  for (const char* key : kKeys) os << key << " = " << v.at(key) << "  " << unit_comment(key) << "\n";
  return os.str();
}

std::string ScenarioConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : values())
    if (k != "output_dir") canon += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return buf;
}

double ScenarioConfig::effective_dx() const { return dx > 0.0 ? dx : kPi / (4.0 * alpha); }

double ScenarioConfig::effective_dtau() const {
  if (dtau > 0.0) return dtau;
  // box grid spacing after rounding M to an odd count
  const double h = kPi * n_order * unit_length;
  const double cells = 2.0 * std::ceil(h / effective_dx());
  const double e_top = 0.5 * std::pow(kPi / (2.0 * h / cells), 2);
  return std::min(kPi / (4.0 * alpha * alpha), 2.0 * kPi / (1.5 * e_top));
}

double ScenarioConfig::effective_energy_step() const {
  if (energy_step > 0.0) return energy_step;
  return std::min(1.0 / duration, 2.0 * kPi / window_half_width) / 4.0;
}

std::vector<double> ScenarioConfig::sweep_points() const {
  std::vector<double> out;
  std::stringstream ss(sweep_values);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double("sweep_values", item));
  }
  return out;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
  if (preset != "default" && preset != "weak") fail("preset", "expected default or weak");
  SuperoscSpec spec{n_order, alpha, unit_length};
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail("n_order/alpha", e.what());
  }
  if (alpha < 1.0) fail("alpha", "must be >= 1 for superoscillation");
  const double h = spec.half_length();
  if (!(window_half_width > 0.0)) fail("window_half_width", "must be > 0 (a zero-width window releases nothing)");
  if (window_half_width > h) fail("window_half_width", "exceeds the box half-length pi N a = " + fmt(h));
  if (!(duration > 0.0) || !std::isfinite(duration)) fail("duration", "must be > 0");
  try {
    (void)parse_opener_shape(opener_shape);
  } catch (const std::exception& e) {
    fail("opener_shape", e.what());
  }
  if (effective_opener_width() > duration) fail("opener_width", "opener support must fit in [0, T]");
  if (dx < 0.0) fail("dx", "must be >= 0");
  if (effective_dx() > kPi / (4.0 * alpha) * (1.0 + 1e-12))
    fail("dx", "coarser than 8 points per wavelength of sin(alpha x); need dx <= pi/(4 alpha) = " + fmt(kPi / (4.0 * alpha)));
  if (dtau < 0.0) fail("dtau", "must be >= 0");
  if (0.5 * alpha * alpha * effective_dtau() > kPi / 4.0 * (1.0 + 1e-12))
    fail("dtau", "alpha^2 dtau / 2 exceeds pi/4; need dtau <= " + fmt(kPi / (2.0 * alpha * alpha)));
  if (energy_step < 0.0) fail("energy_step", "must be >= 0");
  if (k_padding < 1 || k_padding > 64) fail("k_padding", "must lie in [1, 64]");
  if (!(tau_max_factor > 0.0)) fail("tau_max_factor", "must be > 0");
  const double m = 2.0 * n_order * alpha * unit_length;
  if (std::abs(m - std::round(m)) > 1e-9 || static_cast<long>(std::llround(m)) % 2 != 0)
    fail("alpha", "N alpha a must be an integer so that sin(alpha x) fits the box");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
  if (sweep_axis != "L" && sweep_axis != "N") fail("sweep_axis", "expected L or N");
  const auto pts = sweep_points();
  if (pts.empty()) fail("sweep_values", "needs at least one value");
  for (double p : pts)
    if (!(p > 0.0)) fail("sweep_values", "values must be positive");
}

}  // namespace superosc
