#include "diffu/report/manifest.hpp"

#include <algorithm>
#include <filesystem>

#include <openssl/evp.h>

#include "diffu/common/error.hpp"
#include "diffu/report/csv.hpp"
#include "diffu/report/json_io.hpp"

namespace diffu::report {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files_j = nlohmann::json::array();
  for (const auto& f : files) files_j.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"command_line", command_line}, {"config", config},         {"seed", seed},
          {"version", version},           {"wall_time_seconds", wall_time_seconds}, {"files", files_j}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command_line = j.at("command_line").get<std::string>();
  m.config = j.at("config");
  m.seed = j.at("seed").get<std::uint64_t>();
  m.version = j.at("version").get<std::string>();
  m.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  for (const auto& f : j.at("files")) {
    m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                       f.at("bytes").get<std::uintmax_t>()});
  }
  return m;
}

void write_manifest(const std::string& dir, RunManifest manifest, const std::vector<std::string>& files) {
  namespace fs = std::filesystem;
  std::vector<std::string> sorted = files;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  manifest.files.clear();
  for (const auto& rel : sorted) {
    if (rel == "manifest.json") continue;
    const fs::path p = fs::path(dir) / rel;
    manifest.files.push_back({rel, sha256_file(p.string()), fs::file_size(p)});
  }
  write_json((fs::path(dir) / "manifest.json").string(), manifest.to_json());
}

std::vector<std::string> verify_manifest(const std::string& dir) {
  namespace fs = std::filesystem;
  const RunManifest m = RunManifest::from_json(read_json((fs::path(dir) / "manifest.json").string()));
  std::vector<std::string> bad;
  for (const auto& f : m.files) {
    const fs::path p = fs::path(dir) / f.path;
    if (!fs::exists(p) || sha256_file(p.string()) != f.sha256) bad.push_back(f.path);
  }
  return bad;
}

}  // namespace diffu::report
