#pragma once

// Run manifest: config hash, every file under the output directory, check
// results and stage timings. Rewritten atomically (temp file + rename).

#include <string>
#include <utility>
#include <vector>

namespace superosc {

struct RunManifest {
  std::string config_hash;
  std::vector<std::string> files;  // relative to the output directory, sorted
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::pair<std::string, double>> stage_seconds;

  void set_check(const std::string& name, bool pass);
  void set_stage(const std::string& name, double seconds);
  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] std::string to_text() const;
  static RunManifest parse(const std::string& text);
};

constexpr const char* kManifestName = "manifest.txt";

/// Reads dir/manifest.txt; empty manifest when absent.
RunManifest load_manifest(const std::string& dir);

/// Rescans dir for the file list, then writes dir/manifest.txt atomically.
void write_manifest(const std::string& dir, RunManifest manifest);

/// Writes content to path through a temporary sibling and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace superosc
