#include "diffu/toy/train.hpp"

#include <cmath>
#include <numeric>

#include "diffu/common/error.hpp"
#include "diffu/common/rng.hpp"

namespace diffu::toy {

nlohmann::json TrainConfig::to_json() const {
  return {{"dataset_size", dataset_size},
          {"batch", batch},
          {"epochs", epochs},
          {"optimizer", optimizer.to_json()},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.dataset_size = j.at("dataset_size").get<std::size_t>();
  c.batch = j.at("batch").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.optimizer = AdamWConfig::from_json(j.at("optimizer"));
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void TrainConfig::validate() const {
  require(dataset_size >= 1 && batch >= 1 && epochs >= 1, "dataset_size, batch and epochs must be positive");
  require(optimizer.lr > 0.0 && optimizer.eps > 0.0 && optimizer.weight_decay >= 0.0,
          "optimizer lr and eps must be > 0, weight decay >= 0");
  require(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0,
          "optimizer betas must lie in [0, 1)");
}

double Checkpoint::input_scale(double tau) const { return 1.0 / std::sqrt(data_variance + tau); }

double mean_coordinate_variance(const Matrix& data) {
  if (data.rows() < 2) return 1.0;
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const double v = (data.rowwise() - mean).squaredNorm() / static_cast<double>((data.rows() - 1) * data.cols());
  return v > 0.0 ? v : 1.0;
}

Batch make_batch(const Matrix& data, const std::vector<Index>& rows, const NoiseSchedule& schedule,
                 double data_variance, std::uint64_t seed, std::uint64_t step) {
  const Index k = data.cols();
  const auto b = static_cast<Index>(rows.size());
  Batch out{Matrix(k, b), Vector(b), Matrix(k, b)};
  CounterRng rng(seed, StreamTag::kBatch, step);
  const double lo = std::log(schedule.tau_min);
  const double hi = std::log(schedule.tau_max);
  for (Index j = 0; j < b; ++j) {
    const auto x0 = data.row(rows[static_cast<std::size_t>(j)]).transpose();
    for (Index i = 0; i < k; ++i) out.targets(i, j) = rng.normal();
    if (schedule.kind == ScheduleKind::kVeContinuous) {
      const double tau = std::exp(lo + (hi - lo) * rng.uniform());
      const double c_in = 1.0 / std::sqrt(data_variance + tau);
      out.inputs.col(j) = c_in * (x0 + std::sqrt(tau) * out.targets.col(j));
      out.times(j) = std::log(tau);
    } else {
      const auto t = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(schedule.steps)));
      const double abar = schedule.alpha_bars[t];
      out.inputs.col(j) = std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * out.targets.col(j);
      out.times(j) = static_cast<double>(t);
    }
  }
  return out;
}

Checkpoint train(const TrainConfig& config, const Matrix& data, const NoiseSchedule& schedule,
                 const EmbedConfig& embed, const EpochCallback& on_epoch) {
  config.validate();
  require(data.rows() >= 1 && data.allFinite(), "training data must be non-empty and finite");
  Checkpoint ck;
  ck.schedule = schedule;
  ck.config = config;
  ck.data_variance = mean_coordinate_variance(data);
  ck.net = MlpScoreNet(data.cols(), embed);
  ck.net.initialize(config.seed);

  AdamWState state(ck.net.parameter_count());
  Vector grad;
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<Index> order(n);
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    CounterRng shuffle(config.seed, StreamTag::kShuffle, epoch);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double weighted = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch) {
      const std::size_t end = std::min(n, start + config.batch);
      const std::vector<Index> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
      const Batch b = make_batch(data, rows, schedule, ck.data_variance, config.seed, step++);
      const double loss = ck.net.loss_and_grads(b.inputs, b.times, b.targets, grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + " (loss " + std::to_string(loss) +
                             "); lower the learning rate");
      }
      adamw_step(ck.net.params(), state, grad, config.optimizer);
      weighted += loss * static_cast<double>(end - start);
    }
    const double epoch_loss = weighted / static_cast<double>(n);
    ck.epoch_losses.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  ck.final_loss = ck.epoch_losses.back();
  return ck;
}

}  // namespace diffu::toy
