#include "diffu/report/config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "diffu/common/error.hpp"
#include "diffu/report/csv.hpp"

namespace diffu::report {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail_validation("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    fail_validation("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::string valid_keys() {
  std::string s;
  for (const auto& k : config_keys()) s += (s.empty() ? "" : ", ") + k;
  return s;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "name",         "measure", "encoder",    "n",          "m_probes", "budget",     "sqrt_tau_min",
      "sqrt_tau_max", "grid_points", "spacing", "taus",      "score_source", "checkpoint", "seed",
      "fir_method",   "probe",   "fd_step",    "threads",    "out"};
  return keys;
}

void set_config_value(ExperimentSpec& s, const std::string& key, const std::string& value) {
  if (key == "name") s.name = value;
  else if (key == "measure") s.measure = value;
  else if (key == "encoder") s.encoder = value;
  else if (key == "n") s.n = to_count(key, value);
  else if (key == "m_probes") s.m_probes = to_count(key, value);
  else if (key == "budget") {
    if (value != "default" && value != "large-model") fail_validation("budget must be 'default' or 'large-model'");
    s.budget = value;
  } else if (key == "sqrt_tau_min") s.sqrt_tau_min = to_double(key, value);
  else if (key == "sqrt_tau_max") s.sqrt_tau_max = to_double(key, value);
  else if (key == "grid_points") s.grid_points = to_count(key, value);
  else if (key == "spacing") {
    parse_spacing(value);
    s.spacing = value;
  } else if (key == "taus") {
    s.taus.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) s.taus.push_back(to_double(key, trim(item)));
  } else if (key == "score_source") {
    if (value != "analytic_oracle" && value != "trained_model") {
      fail_validation("score_source must be 'analytic_oracle' or 'trained_model'");
    }
    s.score_source = value;
  } else if (key == "checkpoint") s.checkpoint = value;
  else if (key == "seed") s.seed = to_count(key, value);
  else if (key == "fir_method") {
    if (value != "jvp" && value != "fd") fail_validation("fir_method must be 'jvp' or 'fd'");
    s.fir_method = value;
  } else if (key == "probe") {
    if (value != "rademacher" && value != "gaussian") fail_validation("probe must be 'rademacher' or 'gaussian'");
    s.probe = value;
  } else if (key == "fd_step") s.fd_step = to_double(key, value);
  else if (key == "threads") s.threads = to_count(key, value);
  else if (key == "out") s.out = value;
  else fail_validation("unknown config key '" + key + "'; valid keys: " + valid_keys());
}

KeyValues parse_config_text(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) fail_validation(where + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_validation(where + ": missing key before '='");
    try {
      ExperimentSpec probe;
      set_config_value(probe, key, value);
    } catch (const ValidationError& e) {
      fail_validation(where + ": " + e.what());
    }
    kv[key] = value;
  }
  return kv;
}

ExperimentSpec resolve_config(const KeyValues& file, const KeyValues& flags) {
  KeyValues merged = file;
  for (const auto& [k, v] : flags) merged[k] = v;
  ExperimentSpec s;
  if (const char* env = std::getenv("DIFFU_OUT_DIR"); env && *env) s.out = env;
  if (auto it = merged.find("budget"); it != merged.end() && it->second == "large-model") {
    s.n = 200;
    s.m_probes = 20;
  }
  for (const auto& [k, v] : merged) set_config_value(s, k, v);
  s.grid();
  return s;
}

ExperimentSpec load_config(const std::string& path, const KeyValues& flags) {
  return resolve_config(parse_config_text(read_text_file(path), path), flags);
}

TauGrid ExperimentSpec::grid() const {
  if (!taus.empty()) return TauGrid::custom(taus);
  switch (parse_spacing(spacing)) {
    case GridSpacing::kLogSqrt:
      return TauGrid::log_sqrt(sqrt_tau_min, sqrt_tau_max, grid_points);
    case GridSpacing::kLog:
      return TauGrid::log(sqrt_tau_min * sqrt_tau_min, sqrt_tau_max * sqrt_tau_max, grid_points);
    case GridSpacing::kLinear:
      return TauGrid::linear(sqrt_tau_min * sqrt_tau_min, sqrt_tau_max * sqrt_tau_max, grid_points);
    case GridSpacing::kCustom:
      break;
  }
  fail_validation("spacing 'custom' needs an explicit 'taus' list");
}

nlohmann::json ExperimentSpec::to_json() const {
  return {{"name", name},
          {"measure", measure},
          {"encoder", encoder},
          {"n", n},
          {"m_probes", m_probes},
          {"budget", budget},
          {"sqrt_tau_min", sqrt_tau_min},
          {"sqrt_tau_max", sqrt_tau_max},
          {"grid_points", grid_points},
          {"spacing", spacing},
          {"taus", taus},
          {"score_source", score_source},
          {"checkpoint", checkpoint},
          {"seed", seed},
          {"fir_method", fir_method},
          {"probe", probe},
          {"fd_step", fd_step},
          {"out", out}};
}

}  // namespace diffu::report
