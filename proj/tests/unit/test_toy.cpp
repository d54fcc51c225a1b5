#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "diffu/common/error.hpp"
#include "diffu/estimators/estimators.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/toy/adamw.hpp"
#include "diffu/toy/checkpoint.hpp"
#include "diffu/toy/embedding.hpp"
#include "diffu/toy/mlp.hpp"
#include "diffu/toy/model_oracle.hpp"
#include "diffu/toy/schedule.hpp"
#include "diffu/toy/train.hpp"

using namespace diffu;
using namespace diffu::toy;

namespace {

EmbedConfig identity_embed(int time_dim = 8) {
  EmbedConfig e;
  e.sinusoidal_input = false;
  e.time_dim = time_dim;
  return e;
}

std::shared_ptr<Checkpoint> random_checkpoint(std::uint64_t seed, bool sinusoidal = false) {
  auto ck = std::make_shared<Checkpoint>();
  EmbedConfig e = sinusoidal ? default_embedding(2) : identity_embed();
  if (sinusoidal) {
    e.input_dim = 16;
    e.time_dim = 16;
    e.input_scale = 2.0;
  }
  ck->net = MlpScoreNet(2, e, {12, 12});
  ck->net.initialize(seed, false);
  ck->schedule = NoiseSchedule::ve();
  ck->data_variance = 1.0;
  return ck;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

double erf_gelu(double z) { return 0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0))); }

}  // namespace

TEST(Embedding, ZeroAndNorm) {
  const Vector z = sinusoidal_embed(0.0, 128);
  for (Index j = 0; j < 64; ++j) {
    EXPECT_EQ(z(2 * j), 0.0);
    EXPECT_EQ(z(2 * j + 1), 1.0);
  }
  for (double v : {-3.0, 0.1, 17.5, 1e3}) EXPECT_NEAR(sinusoidal_embed(v, 128).norm(), std::sqrt(64.0), 1e-12);
  EXPECT_GT((sinusoidal_embed(0.1, 128) - sinusoidal_embed(0.2, 128)).norm(), 1e-3);
  EXPECT_THROW(sinusoidal_embed(1.0, 7), ValidationError);
  const Vector& w = embedding_frequencies(128);
  EXPECT_DOUBLE_EQ(w(0), 1.0);
  EXPECT_NEAR(w(63), 1e-4, 1e-18);
}

TEST(Embedding, DerivativeMatchesFiniteDifference) {
  const int dim = 16;
  std::vector<double> d(dim);
  for (double v : {-0.7, 0.0, 2.3}) {
    sinusoidal_embed_derivative(v, dim, d.data());
    const Vector fd = (sinusoidal_embed(v + 1e-6, dim) - sinusoidal_embed(v - 1e-6, dim)) / 2e-6;
    for (int j = 0; j < dim; ++j) EXPECT_NEAR(d[j], fd(j), 1e-8);
  }
}

TEST(Gelu, ValueAndDerivative) {
  for (double z : {-4.0, -1.0, -0.1, 0.0, 0.3, 2.0, 6.0}) {
    EXPECT_NEAR(gelu(z), erf_gelu(z), 1e-15);
    const double fd = (gelu(z + 1e-6) - gelu(z - 1e-6)) / 2e-6;
    EXPECT_NEAR(gelu_derivative(z), fd, 1e-8);
  }
}

TEST(Mlp, ZeroFinalLayerOutputsZero) {
  MlpScoreNet net(2, default_embedding(2), {8, 8});
  net.initialize(3, true);
  const Matrix x = standard_normal_rows(2, 5, 1);
  const Vector t = Vector::LinSpaced(5, -3, 3);
  EXPECT_EQ(net.forward(x, t).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, HandComputedForward) {
  // identity input, time embedding of dim 2 (frequency 1), one hidden layer of width 2.
  MlpScoreNet net(2, identity_embed(2), {2});
  ASSERT_EQ(net.feature_dim(), 4);
  Matrix w1(2, 4);
  w1 << 0.5, -0.25, 1.0, 0.0, 0.1, 0.2, -0.3, 0.4;
  Vector b1(2);
  b1 << 0.05, -0.1;
  Matrix w2(2, 2);
  w2 << 1.0, 2.0, -1.0, 0.5;
  Vector b2(2);
  b2 << 0.0, 0.3;
  net.weight(0) = w1;
  net.bias(0) = b1;
  net.weight(1) = w2;
  net.bias(1) = b2;

  const double x0 = 0.4, x1 = -1.2, t = 0.7;
  const double f[4] = {x0, x1, std::sin(t), std::cos(t)};
  double h[2];
  for (int i = 0; i < 2; ++i) {
    double z = b1(i);
    for (int j = 0; j < 4; ++j) z += w1(i, j) * f[j];
    h[i] = erf_gelu(z);
  }
  const double o0 = w2(0, 0) * h[0] + w2(0, 1) * h[1] + b2(0);
  const double o1 = w2(1, 0) * h[0] + w2(1, 1) * h[1] + b2(1);

  Matrix x(2, 1);
  x << x0, x1;
  const Vector tv = Vector::Constant(1, t);
  const Matrix out = net.forward(x, tv);
  EXPECT_NEAR(out(0, 0), o0, 1e-14);
  EXPECT_NEAR(out(1, 0), o1, 1e-14);
}

TEST(Mlp, LipschitzSlopeBounded) {
  MlpScoreNet net(2, default_embedding(2), {32, 32});
  net.initialize(5, false);
  const Vector t = Vector::Constant(1, 0.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Matrix x = standard_normal_rows(2, 1, 100 + i);
    const Matrix dx = 1e-5 * standard_normal_rows(2, 1, 200 + i);
    const double slope = (net.forward(x + dx, t) - net.forward(x, t)).norm() / dx.norm();
    worst = std::max(worst, slope);
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 1e4);
}

TEST(Mlp, GradientsMatchCentralDifferences) {
  MlpScoreNet net(2, identity_embed(), {10, 10});
  net.initialize(7, false);
  const Matrix x = standard_normal_rows(2, 6, 8);
  const Vector t = Vector::LinSpaced(6, -2, 2);
  const Matrix target = standard_normal_rows(2, 6, 9);
  Vector grad;
  net.loss_and_grads(x, t, target, grad);
  ASSERT_EQ(grad.size(), net.parameter_count());
  CounterRng pick(10, StreamTag::kUser, 0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto p = static_cast<Index>(pick.below(static_cast<std::uint64_t>(net.parameter_count())));
    const double keep = net.params()[p];
    const double h = 1e-5;
    net.params()[p] = keep + h;
    const double up = net.loss(x, t, target);
    net.params()[p] = keep - h;
    const double down = net.loss(x, t, target);
    net.params()[p] = keep;
    const double fd = (up - down) / (2 * h);
    // Central differences at this step carry ~1e-11 absolute roundoff, so
    // near-zero coordinates are compared on an absolute 1e-4 floor.
    worst = std::max(worst, std::abs(fd - grad[p]) / std::max({std::abs(fd), std::abs(grad[p]), 1e-4}));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Mlp, PerfectPredictorHasZeroLoss) {
  MlpScoreNet net(2, identity_embed(), {4});
  net.initialize(1, false);
  const Matrix x = standard_normal_rows(2, 5, 2);
  const Vector t = Vector::Zero(5);
  const Matrix target = net.forward(x, t);
  Vector grad;
  EXPECT_EQ(net.loss_and_grads(x, t, target, grad), 0.0);
  EXPECT_EQ(grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, DuplicatedBatchLeavesLossAndGradsUnchanged) {
  MlpScoreNet net(2, identity_embed(), {6});
  net.initialize(2, false);
  const Matrix x = standard_normal_rows(2, 4, 3);
  const Vector t = Vector::LinSpaced(4, -1, 1);
  const Matrix target = standard_normal_rows(2, 4, 4);
  Matrix x2(2, 8), target2(2, 8);
  x2 << x, x;
  target2 << target, target;
  Vector t2(8);
  t2 << t, t;
  Vector g1, g2;
  const double l1 = net.loss_and_grads(x, t, target, g1);
  const double l2 = net.loss_and_grads(x2, t2, target2, g2);
  EXPECT_NEAR(l1, l2, 1e-14 * l1);
  EXPECT_LT((g1 - g2).cwiseAbs().maxCoeff(), 1e-13 * g1.cwiseAbs().maxCoeff());
}

TEST(Mlp, ForwardJvpMatchesFiniteDifference) {
  MlpScoreNet net(2, default_embedding(2), {16, 16});
  net.initialize(11, false);
  Vector x(2);
  x << 0.03, -0.02;
  Matrix tangents(2, 2);
  tangents << 1.0, 0.3, -0.5, 1.0;
  Vector value;
  const Matrix jv = net.forward_jvp(x, 0.5, tangents, value);
  const Vector t = Vector::Constant(1, 0.5);
  EXPECT_LT((value - net.forward(x, t).col(0)).norm(), 1e-13);
  for (Index c = 0; c < 2; ++c) {
    const double h = 1e-7;
    const Vector fd = (net.forward(x + h * tangents.col(c), t) - net.forward(x - h * tangents.col(c), t)).col(0) / (2 * h);
    EXPECT_LT((jv.col(c) - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST(AdamW, ZeroGradientNoDecayIsNoop) {
  Vector p = Vector::LinSpaced(4, -1, 1);
  const Vector keep = p;
  AdamWState st(4);
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  for (int i = 0; i < 5; ++i) adamw_step(p, st, Vector::Zero(4), cfg);
  EXPECT_EQ(p, keep);
}

TEST(AdamW, HandComputedFirstStep) {
  AdamWConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.01;
  Vector p(2);
  p << 1.0, -2.0;
  Vector g(2);
  g << 0.5, -3.0;
  AdamWState st(2);
  adamw_step(p, st, g, cfg);
  // First step: mhat = g, vhat = g^2, so the Adam move is lr * g / (|g| + eps).
  const double e0 = 1.0 * (1 - 0.1 * 0.01) - 0.1 * 0.5 / (0.5 + 1e-8);
  const double e1 = -2.0 * (1 - 0.1 * 0.01) + 0.1 * 3.0 / (3.0 + 1e-8);
  EXPECT_NEAR(p(0), e0, 1e-15);
  EXPECT_NEAR(p(1), e1, 1e-15);
  EXPECT_EQ(st.step, 1);
}

TEST(AdamW, Deterministic) {
  auto run = [] {
    MlpScoreNet net(2, identity_embed(), {8});
    net.initialize(4, false);
    AdamWState st(net.parameter_count());
    const Matrix x = standard_normal_rows(2, 16, 5);
    const Vector t = Vector::Zero(16);
    const Matrix target = standard_normal_rows(2, 16, 6);
    Vector g;
    for (int i = 0; i < 100; ++i) {
      net.loss_and_grads(x, t, target, g);
      adamw_step(net.params(), st, g, AdamWConfig{});
    }
    return net.params();
  };
  EXPECT_EQ(run(), run());
}

TEST(Schedule, DdpmTablesMonotone) {
  const auto s = NoiseSchedule::ddpm();
  ASSERT_EQ(s.taus.size(), 100u);
  for (std::size_t t = 1; t < s.taus.size(); ++t) {
    EXPECT_LT(s.alpha_bars[t], s.alpha_bars[t - 1]);
    EXPECT_GT(s.taus[t], s.taus[t - 1]);
  }
  EXPECT_LT(s.taus.front(), 0.1);
  EXPECT_GT(s.taus.back(), 10.0);
  for (std::size_t t = 0; t < s.taus.size(); t += 17) {
    EXPECT_NEAR(s.taus[t], (1 - s.alpha_bars[t]) / s.alpha_bars[t], 1e-12 * s.taus[t]);
    EXPECT_EQ(s.nearest_step(s.taus[t]), static_cast<int>(t));
  }
}

TEST(Schedule, JsonRoundTripAndParse) {
  for (const auto& s : {NoiseSchedule::ve(), NoiseSchedule::ddpm(50, 1e-4, 0.05)}) {
    const auto back = NoiseSchedule::from_json(s.to_json());
    EXPECT_EQ(back.name(), s.name());
    EXPECT_EQ(back.taus, s.taus);
    EXPECT_EQ(back.query_min(), s.query_min());
  }
  EXPECT_EQ(NoiseSchedule::parse("ve").kind, ScheduleKind::kVeContinuous);
  EXPECT_EQ(NoiseSchedule::parse("ddpm").kind, ScheduleKind::kDdpmLinear);
  EXPECT_THROW(NoiseSchedule::parse("cosine"), ValidationError);
}

TEST(Checkpoint, RoundTripsBitExactly) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto ck = random_checkpoint(seed, seed == 2);
    ck->final_loss = 0.123 * static_cast<double>(seed);
    ck->epoch_losses = {1.5, 1.2, ck->final_loss};
    for (auto fmt : {CheckpointFormat::kBinary, CheckpointFormat::kJson}) {
      const auto path = temp_file("diffu_ckpt_" + std::to_string(seed) + (fmt == CheckpointFormat::kJson ? ".json" : ".bin"));
      save_checkpoint(*ck, path.string(), fmt);
      const Checkpoint back = load_checkpoint(path.string());
      std::filesystem::remove(path);
      EXPECT_EQ(back.net.params(), ck->net.params());
      EXPECT_EQ(back.net.hidden(), ck->net.hidden());
      EXPECT_EQ(back.final_loss, ck->final_loss);
      EXPECT_EQ(back.epoch_losses, ck->epoch_losses);
      EXPECT_EQ(back.schedule.name(), ck->schedule.name());
      EXPECT_EQ(back.version, Checkpoint::kFormatVersion);
    }
  }
}

TEST(Checkpoint, RejectsCorruption) {
  const auto ck = random_checkpoint(4);
  const std::string bytes = serialize_checkpoint(*ck, CheckpointFormat::kBinary);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 9)), ValidationError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, 10)), ValidationError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), ValidationError);
  std::string bad_version = bytes;
  bad_version[8] = static_cast<char>(99);
  EXPECT_THROW(deserialize_checkpoint(bad_version), ValidationError);
  EXPECT_THROW(load_checkpoint("/nonexistent/diffu.ckpt"), Error);
}

TEST(ModelOracle, ForwardModeMatchesFiniteDifferenceHvp) {
  auto ck = random_checkpoint(5, true);
  const ModelScoreOracle fwd(ck, nullptr, ModelHvp::kForwardMode);
  const ModelScoreOracle fd(ck, nullptr, ModelHvp::kFiniteDifference);
  Vector x(2);
  x << 0.3, -0.4;
  Vector v(2);
  v << 1.0, -1.0;
  Vector w(2);
  w << 0.25, 2.0;
  for (double tau : {0.1, 1.0, 4.0}) {
    const Vector a = fwd.hessian_vp(x, tau, v);
    const Vector b = fd.hessian_vp(x, tau, v);
    EXPECT_LE((a - b).norm(), 0.01 * a.norm()) << tau;
    const Vector lin = fwd.hessian_vp(x, tau, 2.0 * v + 3.0 * w);
    EXPECT_LE((lin - 2.0 * a - 3.0 * fwd.hessian_vp(x, tau, w)).norm(), 1e-8 * std::max(1.0, lin.norm()));
  }
}

TEST(ModelOracle, RespondMatchesScoreAndHvp) {
  auto ck = random_checkpoint(6);
  const ModelScoreOracle o(ck);
  Vector x(2);
  x << -0.2, 0.9;
  const Matrix probes = standard_normal_rows(2, 3, 7);
  const auto r = o.respond(x, 0.5, probes);
  EXPECT_LT((r.score - o.score(x, 0.5)).norm(), 1e-13);
  for (Index j = 0; j < 3; ++j) EXPECT_LT((r.hvps.col(j) - o.hessian_vp(x, 0.5, probes.col(j))).norm(), 1e-12);
  Matrix xs(2, 2);
  xs << x.transpose(), x.transpose();
  const Matrix batch = o.score_batch(xs, 0.5);
  EXPECT_LT((batch.row(0).transpose() - r.score).norm(), 1e-13);
}

TEST(ModelOracle, RangeAndSamplerErrors) {
  auto ck = random_checkpoint(7);
  const ModelScoreOracle o(ck);
  EXPECT_FALSE(o.has_sampler());
  EXPECT_THROW(o.score(Vector::Zero(2), 1e6), ValidationError);
  EXPECT_THROW(o.score(Vector::Zero(2), 1e-8), ValidationError);
  EXPECT_THROW(estimate_fi(o, 1.0, 10, 0), Error);
  const ModelScoreOracle with_data(ck, std::make_shared<GaussianMeasure>(GaussianMeasure::standard(2)));
  EXPECT_TRUE(with_data.has_sampler());
  EXPECT_NO_THROW(estimate_fi(with_data, 1.0, 10, 0));
}

TEST(ReverseSampling, DeterministicAndFinite) {
  auto ck = random_checkpoint(8);
  const Matrix a = sample_reverse(*ck, 50, 9, 32);
  const Matrix b = sample_reverse(*ck, 50, 9, 32);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.allFinite());
  EXPECT_NE(a, sample_reverse(*ck, 50, 10, 32));
}

TEST(ReverseSampling, ZeroDdpmNetGivesGaussianLikeSamples) {
  Checkpoint ck;
  ck.net = MlpScoreNet(2, identity_embed(), {4});
  ck.net.initialize(1, true);
  ck.schedule = NoiseSchedule::ddpm();
  const Matrix s = sample_reverse(ck, 4000, 3);
  const Vector mean = s.colwise().mean();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_TRUE(s.allFinite());
}

TEST(Train, ShortRunLearnsAndIsDeterministic) {
  TrainConfig cfg;
  cfg.dataset_size = 2048;
  cfg.batch = 128;
  cfg.epochs = 6;
  cfg.optimizer.lr = 2e-3;
  cfg.seed = 3;
  const Matrix data = standard_normal_rows(2048, 2, 4);
  EmbedConfig e = identity_embed(16);
  auto run = [&] { return train(cfg, data, NoiseSchedule::ve(), e); };
  std::vector<double> seen;
  const Checkpoint a = train(cfg, data, NoiseSchedule::ve(), e, [&](std::size_t, double l) { seen.push_back(l); });
  ASSERT_EQ(a.epoch_losses.size(), 6u);
  EXPECT_EQ(seen, a.epoch_losses);
  for (double l : a.epoch_losses) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(a.epoch_losses.back(), a.epoch_losses.front());
  EXPECT_LT(a.final_loss, 2.0);
  const Checkpoint b = run();
  EXPECT_EQ(a.net.params(), b.net.params());
  EXPECT_NEAR(mean_coordinate_variance(data), 1.0, 0.1);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.batch = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  TrainConfig ok;
  EXPECT_NO_THROW(ok.validate());
  const auto back = TrainConfig::from_json(ok.to_json());
  EXPECT_EQ(back.epochs, 200u);
  EXPECT_EQ(back.optimizer.lr, 5e-4);
}
