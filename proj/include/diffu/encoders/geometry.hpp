#pragma once

#include <cstdint>
#include <vector>

#include "diffu/encoders/encoder.hpp"
#include "diffu/measures/empirical.hpp"
#include "diffu/measures/subspace_gaussian.hpp"

namespace diffu {

/// E_# mu for an atomic measure: rows mapped through the encoder, weights kept.
EmpiricalMeasure pushforward(const Encoder& e, const EmpiricalMeasure& m);

/// Applies the encoder to each row of an N x D matrix.
Matrix encode_rows(const Encoder& e, const Matrix& samples);

struct BiLipschitzEstimate {
  double lower = 0.0;  // c-hat, smallest distance ratio seen
  double upper = 0.0;  // C-hat, largest distance ratio seen
  double ratio = 0.0;  // upper / lower
  std::size_t pairs = 0;
};

/// Distance ratios ||E(x_i) - E(x_j)|| / ||x_i - x_j|| over all pairs when the
/// budget allows, otherwise over `pair_budget` distinct pairs drawn without
/// replacement from the seeded stream.
BiLipschitzEstimate bilipschitz_estimate(const Encoder& e, const Matrix& samples, std::size_t pair_budget,
                                         std::uint64_t seed = 0);

/// ||(J B)^T (J B) - I_m||_2 with J the Jacobian at x and B an orthonormal
/// tangent basis (D x m).
double isometry_defect(const Encoder& e, const Vector& x, const Matrix& tangent_basis);

/// sqrt(E ||E(x) - E(x0) - J(x0)(x - x0)||^2) over clean draws x ~ base.
double taylor_residual(const Encoder& e, const ScoreOracle& base, const Vector& x0, std::size_t mc_samples,
                       std::uint64_t seed);

struct TaylorResidualSweep {
  Matrix candidates;        // one candidate x0 per row
  Vector residuals;         // epsilon at each candidate
  Index best = 0;
  double epsilon = 0.0;     // min over candidates
  Vector best_x0;
};

/// Candidate base points along each intrinsic axis of a subspace Gaussian:
/// `points_per_axis` values in [-half_width, half_width] standard deviations.
Matrix axis_grid(const SubspaceGaussian& base, int points_per_axis = 17, double half_width = 2.0);

/// Minimizes taylor_residual over candidate rows (common random numbers are
/// shared across candidates so the comparison is paired).
TaylorResidualSweep taylor_residual_min(const Encoder& e, const ScoreOracle& base, const Matrix& candidates,
                                        std::size_t mc_samples, std::uint64_t seed);

/// Curvature-injection operator K(x) = sum_i s_i Hess E_i(x) (D x D), from
/// nested forward-mode duals. Throws DistributionalCurvature when a
/// piecewise-linear stage is exactly on its kink.
Matrix curvature_injection_matrix(const Encoder& e, const Vector& x, const Vector& latent_score);

/// K(x) v.
Vector curvature_injection_vp(const Encoder& e, const Vector& x, const Vector& latent_score, const Vector& v);

/// Per-direction Frobenius contribution ||K(x) e_j||^2; sums to ||K||_F^2.
Vector curvature_injection(const Encoder& e, const Vector& x, const Vector& latent_score);

}  // namespace diffu
