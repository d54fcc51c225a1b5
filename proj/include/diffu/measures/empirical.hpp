#pragma once

#include <vector>

#include "diffu/measures/score_oracle.hpp"

namespace diffu {

class EmpiricalMeasure;

/// Posterior over atoms given a noisy observation x at variance tau. Only
/// atoms whose log-weight lies within kLogWeightCutoff of the maximum are
/// kept in `support`; the rest have weight below e^-60 relative to the top
/// atom and are stored as exact zeros.
struct MixturePosterior {
  static constexpr double kLogWeightCutoff = 60.0;

  Vector mean;                      // sum_i w_i x_i
  std::vector<Index> support;       // atoms with non-negligible weight
  Matrix centred;                   // k x |support|, x_i - mean
  Vector support_weights;           // posterior weights on the support, sum to 1

  /// Cov_post · v, accumulated as sum_i w_i <x_i - m, v> (x_i - m).
  Vector cov_vp(const Vector& v) const;
  /// Dense k x k posterior covariance (only for small k).
  Matrix covariance() const;
};

/// Weighted atoms in R^k. The smoothed measure is an N-component isotropic
/// Gaussian mixture, so score and Hessian come from Tweedie's formula.
class EmpiricalMeasure final : public ScoreOracle {
 public:
  explicit EmpiricalMeasure(Matrix samples);
  EmpiricalMeasure(Matrix samples, Vector weights);

  Index size() const { return samples_.rows(); }
  const Matrix& samples() const { return samples_; }
  const Vector& weights() const { return weights_; }
  bool uniform_weights() const { return uniform_; }

  Index dim() const override { return samples_.cols(); }
  std::string id() const override;
  bool has_hvp() const override { return true; }
  bool has_exact_hessian() const override { return true; }
  bool has_sampler() const override { return true; }

  Vector score(const Vector& x, double tau) const override;
  Vector hessian_vp(const Vector& x, double tau, const Vector& v) const override;
  LocalResponse respond(const Vector& x, double tau, const Matrix& probes) const override;
  void draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const override;

  /// Index of the atom drawn from the stream (by weight).
  Index draw_index(CounterRng& rng) const;

  MixturePosterior posterior(const Vector& x, double tau) const;

  /// Applies an orthogonal-or-any linear map / column permutation to atoms.
  EmpiricalMeasure permuted_columns(const std::vector<Index>& perm) const;

 private:
  void init();

  Matrix samples_;   // N x k
  Matrix atoms_t_;   // k x N, column-major copy for fast distance passes
  Vector weights_;
  Vector log_weights_;
  Vector cumulative_;
  bool uniform_ = true;
};

MixturePosterior mixture_posterior(const EmpiricalMeasure& e, const Point& x, double tau);
/// (post_mean(x) - x) / tau.
Vector mixture_score(const EmpiricalMeasure& e, const Point& x, double tau);
/// Cov_post v / tau^2 - v / tau.
Vector mixture_hessian_vp(const EmpiricalMeasure& e, const Point& x, double tau, const Vector& v);

}  // namespace diffu
