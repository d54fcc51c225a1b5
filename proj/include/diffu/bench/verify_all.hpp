#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diffu/bench/experiments.hpp"

namespace diffu::bench {

using ParamMap = std::map<std::string, std::string>;

/// Experiments accepted by run_named_experiment, in verify-all order.
const std::vector<std::string>& experiment_names();

/// Runs one experiment with `key=value` overrides of its default parameters.
/// Unknown experiments or keys raise ValidationError listing the valid ones.
ExperimentOutput run_named_experiment(const std::string& name, std::uint64_t seed, const ParamMap& params = {});

// Training-backed checks on the builtin gauss2d data: final loss, model FI
// against the closed form and a gradient check.
ExperimentOutput exp_toy_training(std::uint64_t seed, const toy::TrainConfig& config);

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::string out = "out/verify";
  bool include_training = false;
  std::string command_line;
};

struct VerifySummary {
  std::vector<std::string> experiments;
  std::vector<bool> passed;
  std::size_t verdicts = 0;
  std::size_t failed_verdicts = 0;

  bool all_pass() const { return failed_verdicts == 0; }
};

/// Runs the suite, writing one subdirectory per experiment, summary.json and
/// a single manifest.json at the top of `out`.
VerifySummary verify_all(const VerifyOptions& opt);

}  // namespace diffu::bench
