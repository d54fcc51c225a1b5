#pragma once

#include "diffu/measures/score_oracle.hpp"

namespace diffu {

/// N(mean, covariance) on R^k with a PSD covariance (singular allowed).
/// The smoothed measure is N(mean, covariance + tau I), so every quantity
/// has a closed form through the eigendecomposition of the covariance.
class GaussianMeasure final : public ScoreOracle {
 public:
  GaussianMeasure(Vector mean, Matrix covariance);

  static GaussianMeasure standard(Index k);
  static GaussianMeasure point_mass(Vector at);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  /// Ascending eigenvalues, clamped at zero.
  const Vector& eigenvalues() const { return eigvals_; }
  const Matrix& eigenvectors() const { return eigvecs_; }

  Index dim() const override { return mean_.size(); }
  std::string id() const override;
  bool has_hvp() const override { return true; }
  bool has_exact_hessian() const override { return true; }
  bool has_sampler() const override { return true; }

  Vector score(const Vector& x, double tau) const override;
  Vector hessian_vp(const Vector& x, double tau, const Vector& v) const override;
  LocalResponse respond(const Vector& x, double tau, const Matrix& probes) const override;
  void draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const override;

  /// (Sigma + tau I)^{-1} v via the eigenbasis.
  Vector smoothed_precision_vp(double tau, const Vector& v) const;

  /// Pushforward under x -> a x + b.
  GaussianMeasure affine(const Matrix& a, const Vector& b) const;

 private:
  Vector mean_;
  Matrix cov_;
  Vector eigvals_;
  Matrix eigvecs_;
};

Vector gaussian_score(const GaussianMeasure& g, const Point& x, double tau);
/// Tr((Sigma + tau I)^{-1}).
double gaussian_fi_exact(const GaussianMeasure& g, double tau);
/// Tr((Sigma + tau I)^{-2}).
double gaussian_fir_exact(const GaussianMeasure& g, double tau);

}  // namespace diffu
