#pragma once

#include "diffu/measures/gaussian.hpp"

namespace diffu {

/// A centred Gaussian living on an m-dimensional linear subspace of R^k:
/// mu = U_# N(0, S) with U (k x m) having orthonormal columns.
///
/// The smoothed density factorizes into the intrinsic smoothed Gaussian and
/// pure N(0, tau) noise in the k - m normal directions.
class SubspaceGaussian final : public ScoreOracle {
 public:
  SubspaceGaussian(Matrix embedding, Matrix intrinsic_covariance);

  /// First m coordinate axes of R^k, intrinsic N(0, I_m).
  static SubspaceGaussian coordinate(Index m, Index k);

  Index intrinsic_dim() const { return embedding_.cols(); }
  const Matrix& embedding() const { return embedding_; }
  const Matrix& intrinsic_covariance() const { return intrinsic_.covariance(); }
  const GaussianMeasure& intrinsic() const { return intrinsic_; }

  /// Same measure as a (singular) ambient Gaussian.
  GaussianMeasure as_ambient() const;

  Index dim() const override { return embedding_.rows(); }
  std::string id() const override;
  bool has_hvp() const override { return true; }
  bool has_exact_hessian() const override { return true; }
  bool has_sampler() const override { return true; }

  Vector score(const Vector& x, double tau) const override;
  Vector hessian_vp(const Vector& x, double tau, const Vector& v) const override;
  void draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const override;

 private:
  Matrix embedding_;
  GaussianMeasure intrinsic_;
};

/// R^(m)(rho_tau) + (k - m) / tau^2.
double subspace_fir_exact(const SubspaceGaussian& s, double tau);
/// I^(m)(rho_tau) + (k - m) / tau.
double subspace_fi_exact(const SubspaceGaussian& s, double tau);

}  // namespace diffu
