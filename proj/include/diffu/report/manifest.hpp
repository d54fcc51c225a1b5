#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace diffu::report {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Record of one CLI run. Everything except `wall_time_seconds` and
/// `command_line` is a pure function of the resolved configuration.
struct RunManifest {
  std::string command_line;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;
  double wall_time_seconds = 0.0;
  std::vector<ManifestEntry> files;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Hashes `files` (relative to dir), sorted by path, and writes
/// dir/manifest.json.
void write_manifest(const std::string& dir, RunManifest manifest, const std::vector<std::string>& files);

/// Recomputes every hash; returns the paths whose content no longer matches.
std::vector<std::string> verify_manifest(const std::string& dir);

}  // namespace diffu::report
