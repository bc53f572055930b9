#include "superosc/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace superosc {

namespace fs = std::filesystem;

void RunManifest::set_check(const std::string& name, bool pass) {
  for (auto& c : checks)
    if (c.first == name) {
      c.second = pass;
      return;
    }
  checks.emplace_back(name, pass);
}

void RunManifest::set_stage(const std::string& name, double seconds) {
  for (auto& s : stage_seconds)
    if (s.first == name) {
      s.second = seconds;
      return;
    }
  stage_seconds.emplace_back(name, seconds);
}

bool RunManifest::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

std::string RunManifest::to_text() const {
  std::ostringstream os;
  os << "superosc-manifest 1\n";
  os << "config_hash: " << config_hash << "\n";
  for (const auto& f : files) os << "file: " << f << "\n";
  for (const auto& [name, pass] : checks) os << "check: " << name << " " << (pass ? "pass" : "fail") << "\n";
  char buf[64];
  for (const auto& [name, sec] : stage_seconds) {
    std::snprintf(buf, sizeof buf, "%.3f", sec);
    os << "stage: " << name << " " << buf << "\n";
  }
  os << "all_pass: " << (all_pass() ? "true" : "false") << "\n";
  return os.str();
}

RunManifest RunManifest::parse(const std::string& text) {
  RunManifest m;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto take = [&](const char* prefix) -> const char* {
      const std::size_t n = std::char_traits<char>::length(prefix);
      return line.compare(0, n, prefix) == 0 ? line.c_str() + n : nullptr;
    };
    if (const char* v = take("config_hash: ")) {
      m.config_hash = v;
    } else if (const char* v = take("file: ")) {
      m.files.emplace_back(v);
    } else if (const char* v = take("check: ")) {
      std::string s = v;
      const auto sp = s.rfind(' ');
      m.checks.emplace_back(s.substr(0, sp), s.substr(sp + 1) == "pass");
    } else if (const char* v = take("stage: ")) {
      std::string s = v;
      const auto sp = s.rfind(' ');
      m.stage_seconds.emplace_back(s.substr(0, sp), std::stod(s.substr(sp + 1)));
    }
  }
  return m;
}

RunManifest load_manifest(const std::string& dir) {
  std::ifstream is(fs::path(dir) / kManifestName);
  if (!is) return {};
  std::stringstream ss;
  ss << is.rdbuf();
  return RunManifest::parse(ss.str());
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_manifest(const std::string& dir, RunManifest manifest) {
  manifest.files.clear();
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel.size() > 4 && rel.compare(rel.size() - 4, 4, ".tmp") == 0) continue;
    manifest.files.push_back(rel);
  }
  if (std::find(manifest.files.begin(), manifest.files.end(), kManifestName) == manifest.files.end())
    manifest.files.emplace_back(kManifestName);
  std::sort(manifest.files.begin(), manifest.files.end());
  write_file_atomic((fs::path(dir) / kManifestName).string(), manifest.to_text());
}

}  // namespace superosc
