#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffu/estimators/tau_grid.hpp"

namespace diffu::report {

/// Fully resolved run description. Defaults follow the estimator settings
/// n = 1000 samples, 50 probes, 64-point sqrt(tau) grid over [0.01, 80].
struct ExperimentSpec {
  std::string name = "sweep";
  std::string measure = "builtin:gauss2d";
  std::string encoder = "identity";
  std::size_t n = 1000;
  std::size_t m_probes = 50;
  std::string budget = "default";
  double sqrt_tau_min = 0.01;
  double sqrt_tau_max = 80.0;
  std::size_t grid_points = 64;
  std::string spacing = "log-sqrt";
  std::vector<double> taus;  // explicit list; overrides the grid when set
  std::string score_source = "analytic_oracle";
  std::string checkpoint;
  std::uint64_t seed = 0;
  std::string fir_method = "jvp";
  std::string probe = "rademacher";
  double fd_step = 0.0;
  std::size_t threads = 0;  // 0: DIFFU_THREADS or hardware concurrency
  std::string out = "out";

  TauGrid grid() const;
  nlohmann::json to_json() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Keys accepted in config files and as CLI overrides.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines; '#' starts a comment and blank lines are
/// skipped. Malformed lines and unknown keys raise ValidationError naming
/// the source and line.
KeyValues parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Defaults, then file values, then flag values (flags win). The output
/// directory default comes from DIFFU_OUT_DIR when set.
ExperimentSpec resolve_config(const KeyValues& file, const KeyValues& flags = {});

ExperimentSpec load_config(const std::string& path, const KeyValues& flags = {});

/// Assigns one key; throws ValidationError for unknown keys (listing the
/// valid ones) or unparsable values.
void set_config_value(ExperimentSpec& spec, const std::string& key, const std::string& value);

}  // namespace diffu::report
