#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "diffu/toy/adamw.hpp"
#include "diffu/toy/mlp.hpp"
#include "diffu/toy/schedule.hpp"

namespace diffu::toy {

struct TrainConfig {
  std::size_t dataset_size = 50000;
  std::size_t batch = 256;
  std::size_t epochs = 200;
  AdamWConfig optimizer;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  MlpScoreNet net;
  NoiseSchedule schedule;
  TrainConfig config;
  double data_variance = 1.0;  // per-coordinate, sets the VE input scaling
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
  std::uint32_t version = kFormatVersion;

  /// VE input preconditioning 1 / sqrt(data_variance + tau).
  double input_scale(double tau) const;
};

/// One training minibatch: network inputs (k x B), time inputs and target
/// noise.
struct Batch {
  Matrix inputs;
  Vector times;
  Matrix targets;
};

/// Noises the rows `rows` of data (N x k) with draws from the given stream.
Batch make_batch(const Matrix& data, const std::vector<Index>& rows, const NoiseSchedule& schedule,
                 double data_variance, std::uint64_t seed, std::uint64_t step);

/// Mean per-coordinate variance of the data rows.
double mean_coordinate_variance(const Matrix& data);

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Denoising score-matching training with AdamW. Throws NumericalError when
/// the loss becomes non-finite.
Checkpoint train(const TrainConfig& config, const Matrix& data, const NoiseSchedule& schedule,
                 const EmbedConfig& embed, const EpochCallback& on_epoch = {});

}  // namespace diffu::toy
