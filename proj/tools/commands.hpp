#pragma once

#include <string>
#include <vector>

#include "diffu/report/config.hpp"

namespace diffu::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kRuntimeError = 1, kValidationError = 2, kUsage = 64 };

struct EstimateArgs {
  report::KeyValues flags;
  std::string config_path;
  bool write_outputs = false;
};

int cmd_fi(const EstimateArgs& a, const std::string& command_line);
int cmd_fir(const EstimateArgs& a, const std::string& command_line);
int cmd_sweep(const EstimateArgs& a, const std::string& command_line);

struct DeviationArgs {
  std::string pixel, latent, out;
  long big_d = 0, d = 0, m = 0;
};
int cmd_deviation(const DeviationArgs& a, const std::string& command_line);

struct TrainArgs {
  std::string data = "builtin:gauss2d";
  std::string schedule = "ve";
  std::string format = "binary";
  std::string out;
  std::size_t epochs = 200, dataset_size = 50000, batch = 256;
  double lr = 5e-4;
  double beta_end = 0.05;
  std::uint64_t seed = 0;
  bool quiet = false;
};
int cmd_train(const TrainArgs& a, const std::string& command_line);

struct BenchArgs {
  std::string experiment;
  std::vector<std::string> params;
  std::string out;
  std::uint64_t seed = 0;
  bool include_training = false;
};
int cmd_bench_run(const BenchArgs& a, const std::string& command_line);
int cmd_bench_verify(const BenchArgs& a, const std::string& command_line);

struct SpectraArgs {
  std::string input, out, mode = "1d";
  bool header = false, normalize = false, keep_dc = false;
  long channels = 1, height = 0, width = 0;
};
int cmd_spectra(const SpectraArgs& a, const std::string& command_line);

struct BilipArgs {
  std::string encoder = "identity", measure = "builtin:gauss2d";
  std::size_t samples = 5000, pairs = 0;
  std::uint64_t seed = 0;
};
int cmd_bilip(const BilipArgs& a);

/// Output directory when none is given: DIFFU_OUT_DIR, else "out".
std::string default_out_dir();

}  // namespace diffu::cli
