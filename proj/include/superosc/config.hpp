#pragma once

// Scenario configuration: flat "key = value" text, one key per line, '#' comments.
// Any key can be overridden from the environment as SUPEROSC_<KEY> (upper case).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace superosc {

struct ScenarioConfig {
  std::string preset = "default";
  int n_order = 100;
  double alpha = 4.0;
  double unit_length = 1.0;
  double window_half_width = 10.0;  // L
  double duration = 10.0;           // T
  std::string opener_shape = "bump";
  double opener_width = -1.0;       // < 0: same as duration
  double dx = 0.0;                  // 0: pi / (4 alpha)
  double dtau = 0.0;                // 0: min(pi / (4 alpha^2), 2 pi / (1.5 E_top))
  double energy_step = 0.0;         // 0: min(1/T, 2 pi / L) / 4
  int k_padding = 4;
  double tau_max_factor = 4.0;      // characteristic series up to factor * T
  std::string output_dir = "out";
  std::string sweep_axis = "L";     // L or N
  std::string sweep_values = "5,10,15";

  static ScenarioConfig from_preset(const std::string& name);
  /// A preset line resets `base` first unless honor_preset is false (then it is ignored).
  static ScenarioConfig parse(const std::string& text, ScenarioConfig base, bool honor_preset = true);
  static ScenarioConfig load(const std::string& path, ScenarioConfig base, bool honor_preset = true);

  void set(const std::string& key, const std::string& value);
  [[nodiscard]] std::map<std::string, std::string> values() const;
  /// Applies SUPEROSC_* variables except SUPEROSC_PRESET; returns the keys that were overridden.
  std::vector<std::string> apply_environment();
  [[nodiscard]] std::string to_text() const;
  /// FNV-1a over the physics keys (output_dir excluded), hex.
  [[nodiscard]] std::string hash() const;
  /// Re-runs the guards of every module; throws ConfigError with the offending key.
  void validate() const;

  [[nodiscard]] double effective_opener_width() const { return opener_width < 0.0 ? duration : opener_width; }
  [[nodiscard]] double effective_dx() const;
  [[nodiscard]] double effective_dtau() const;
  [[nodiscard]] double effective_energy_step() const;
  [[nodiscard]] std::vector<double> sweep_points() const;
};

std::uint64_t fnv1a(const std::string& data);

}  // namespace superosc
