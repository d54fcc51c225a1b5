#pragma once

#include <cstdint>
#include <string>

#include "diffu/common/rng.hpp"
#include "diffu/common/types.hpp"

namespace diffu {

/// Score plus Hessian-vector products at one query point. Column j of
/// `hvps` is H(x)·probes.col(j).
struct LocalResponse {
  Vector score;
  Matrix hvps;
};

/// Anything that can evaluate s_tau(x) = grad log p_tau(x) for the
/// heat-smoothed measure p_tau = mu * N(0, tau I), optionally its Jacobian
/// applied to a vector, and optionally draw from mu_tau.
///
/// All evaluation methods are const and must be safe to call concurrently.
class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;

  virtual Index dim() const = 0;
  virtual std::string id() const = 0;

  virtual bool has_hvp() const { return false; }
  /// True when hessian_vp is exact up to rounding (closed-form oracles).
  virtual bool has_exact_hessian() const { return false; }
  virtual bool has_sampler() const { return false; }

  virtual Vector score(const Vector& x, double tau) const = 0;
  virtual Vector hessian_vp(const Vector& x, double tau, const Vector& v) const;

  /// Scores of the rows of xs (n x k). Networks override this to batch.
  virtual Matrix score_batch(const Matrix& xs, double tau) const;

  /// Score and one HVP per probe column. Oracles that share work across
  /// probes (posterior weights, network activations) override this.
  virtual LocalResponse respond(const Vector& x, double tau, const Matrix& probes) const;

  /// Draws `count` rows from mu_tau. Row i uses its own counter stream
  /// (seed, i) and the same clean point and noise direction for every tau,
  /// so sweeps over tau share random numbers.
  Matrix sample(double tau, Index count, std::uint64_t seed) const;

  /// Draws one clean point x0 ~ mu from the given stream.
  virtual void draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const;

 protected:
  void check_query(const Vector& x, double tau) const;
};

void check_tau(double tau);

}  // namespace diffu
