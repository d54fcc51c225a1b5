#pragma once

#include <memory>

#include "diffu/measures/score_oracle.hpp"
#include "diffu/toy/checkpoint.hpp"

namespace diffu::toy {

enum class ModelHvp { kForwardMode, kFiniteDifference };

/// A trained noise-prediction network as a score oracle,
/// s_tau(x) = -eps_theta(x_in, t) / sqrt(tau). VE checkpoints feed
/// x / sqrt(data_variance + tau) with time log tau. DDPM checkpoints use the
/// step whose tau(t) is nearest in log scale, feed sqrt(abar_t) x and report
/// the score at tau(t).
///
/// Sampling from mu_tau needs the clean data: pass it as `data` to enable
/// the sampler.
class ModelScoreOracle final : public ScoreOracle {
 public:
  explicit ModelScoreOracle(std::shared_ptr<const Checkpoint> ck, std::shared_ptr<const ScoreOracle> data = nullptr,
                            ModelHvp hvp = ModelHvp::kForwardMode);

  const Checkpoint& checkpoint() const { return *ck_; }

  Index dim() const override { return ck_->net.data_dim(); }
  std::string id() const override;
  bool has_hvp() const override { return true; }
  bool has_sampler() const override { return data_ != nullptr; }

  Vector score(const Vector& x, double tau) const override;
  Matrix score_batch(const Matrix& xs, double tau) const override;
  Vector hessian_vp(const Vector& x, double tau, const Vector& v) const override;
  LocalResponse respond(const Vector& x, double tau, const Matrix& probes) const override;
  void draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const override;

  /// Finite-difference step used by the fallback HVP, 1e-3 sqrt(tau).
  static double fd_step(double tau) { return 1e-3 * std::sqrt(tau); }

 private:
  struct Query {
    double in_scale;  // multiplies x before the network
    double time;      // network time input
    double tau;       // tau at which the score is reported
  };
  Query query(double tau) const;

  std::shared_ptr<const Checkpoint> ck_;
  std::shared_ptr<const ScoreOracle> data_;
  ModelHvp hvp_;
};

/// Ancestral reverse sampling. DDPM: the standard chain from t = T to 1.
/// VE: a geometric tau ladder from tau_max down to tau_min followed by a
/// Tweedie denoising step. Returns count x k.
Matrix sample_reverse(const Checkpoint& ck, Index count, std::uint64_t seed, int ve_steps = 256);

}  // namespace diffu::toy
