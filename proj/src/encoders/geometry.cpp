#include "diffu/encoders/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <Eigen/Eigenvalues>

#include "diffu/common/parallel.hpp"
#include "diffu/common/rng.hpp"

namespace diffu {

Matrix encode_rows(const Encoder& e, const Matrix& samples) {
  require(samples.cols() == e.input_dim(), "encoder '" + e.name() + "' expects " + std::to_string(e.input_dim()) +
                                               " columns, got " + std::to_string(samples.cols()));
  Matrix out(samples.rows(), e.output_dim());
  parallel_for(static_cast<std::size_t>(samples.rows()), [&](std::size_t b, std::size_t end) {
    for (auto i = static_cast<Index>(b); i < static_cast<Index>(end); ++i) {
      out.row(i) = e.apply(samples.row(i).transpose()).transpose();
    }
  });
  return out;
}

EmpiricalMeasure pushforward(const Encoder& e, const EmpiricalMeasure& m) {
  Matrix z = encode_rows(e, m.samples());
  if (m.uniform_weights()) return EmpiricalMeasure(std::move(z));
  return EmpiricalMeasure(std::move(z), m.weights());
}

namespace {

// Unordered pair number k in [0, N(N-1)/2) -> (i, j) with i < j, rows in
// lexicographic order.
std::pair<Index, Index> decode_pair(std::uint64_t k, std::uint64_t n) {
  const double nn = static_cast<double>(n);
  auto row_start = [n](std::uint64_t i) { return i * n - i * (i + 1) / 2; };
  auto i = static_cast<std::uint64_t>(std::floor(nn - 0.5 - std::sqrt((nn - 0.5) * (nn - 0.5) - 2.0 * static_cast<double>(k))));
  while (i > 0 && row_start(i) > k) --i;
  while (i + 1 < n && row_start(i + 1) <= k) ++i;
  const std::uint64_t j = k - row_start(i) + i + 1;
  return {static_cast<Index>(i), static_cast<Index>(j)};
}

}  // namespace

BiLipschitzEstimate bilipschitz_estimate(const Encoder& e, const Matrix& samples, std::size_t pair_budget,
                                         std::uint64_t seed) {
  const auto n = static_cast<std::uint64_t>(samples.rows());
  require(n >= 2, "bilipschitz_estimate needs at least two samples");
  require(pair_budget >= 1, "pair budget must be positive");
  const std::uint64_t total = n * (n - 1) / 2;

  std::vector<std::uint64_t> chosen;
  if (pair_budget >= total) {
    chosen.resize(total);
    for (std::uint64_t k = 0; k < total; ++k) chosen[k] = k;
  } else {
    // Floyd's algorithm: exactly `budget` distinct pair numbers.
    CounterRng rng(seed, StreamTag::kPairs, 0);
    std::unordered_set<std::uint64_t> picked;
    picked.reserve(pair_budget * 2);
    for (std::uint64_t j = total - pair_budget; j < total; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      if (!picked.insert(t).second) picked.insert(j);
    }
    chosen.assign(picked.begin(), picked.end());
    std::sort(chosen.begin(), chosen.end());
  }

  const Matrix z = encode_rows(e, samples);
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const auto ratios = parallel_map<double>(chosen.size(), [&](std::size_t c) {
    const auto [i, j] = decode_pair(chosen[c], n);
    const double dx = (samples.row(i) - samples.row(j)).norm();
    if (dx < 1e-12) return kNan;
    return (z.row(i) - z.row(j)).norm() / dx;
  });

  BiLipschitzEstimate r;
  r.lower = std::numeric_limits<double>::infinity();
  r.upper = 0.0;
  for (double q : ratios) {
    if (std::isnan(q)) continue;
    r.lower = std::min(r.lower, q);
    r.upper = std::max(r.upper, q);
    ++r.pairs;
  }
  if (r.pairs == 0) throw ValidationError("bilipschitz_estimate: no pair of distinct samples");
  r.ratio = r.upper / r.lower;
  return r;
}

double isometry_defect(const Encoder& e, const Vector& x, const Matrix& tangent_basis) {
  require(tangent_basis.rows() == e.input_dim(), "tangent basis must have D rows");
  const Index m = tangent_basis.cols();
  require(m >= 1, "tangent basis must have at least one column");
  require((tangent_basis.transpose() * tangent_basis - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-10,
          "tangent basis columns must be orthonormal");
  const Matrix a = e.jacobian(x).matrix * tangent_basis;
  const Matrix g = a.transpose() * a - Matrix::Identity(m, m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double taylor_residual(const Encoder& e, const ScoreOracle& base, const Vector& x0, std::size_t mc_samples,
                       std::uint64_t seed) {
  require(base.dim() == e.input_dim(), "base measure dimension does not match encoder input");
  require(x0.size() == e.input_dim(), "x0 dimension does not match encoder input");
  require(mc_samples >= 1, "taylor_residual needs at least one sample");
  const Vector e0 = e.apply(x0);
  const Matrix j0 = e.jacobian(x0).matrix;
  const auto sq = parallel_map<double>(mc_samples, [&](std::size_t i) {
    CounterRng rng(seed, StreamTag::kResidual, i);
    Vector x(base.dim());
    base.draw_clean(rng, x);
    return (e.apply(x) - e0 - j0 * (x - x0)).squaredNorm();
  });
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(mc_samples));
}

Matrix axis_grid(const SubspaceGaussian& base, int points_per_axis, double half_width) {
  require(points_per_axis >= 1, "axis grid needs at least one point");
  const Index m = base.intrinsic_dim();
  const Matrix& u = base.embedding();
  const GaussianMeasure& g = base.intrinsic();
  Matrix out(m * points_per_axis, base.dim());
  for (Index a = 0; a < m; ++a) {
    // Intrinsic principal axis a, mapped into the ambient space.
    const Vector dir = u * g.eigenvectors().col(a);
    const double sd = std::sqrt(g.eigenvalues()(a));
    for (int p = 0; p < points_per_axis; ++p) {
      const double t = points_per_axis == 1 ? 0.0 : -half_width + 2.0 * half_width * p / (points_per_axis - 1);
      out.row(a * points_per_axis + p) = (t * sd) * dir.transpose();
    }
  }
  return out;
}

TaylorResidualSweep taylor_residual_min(const Encoder& e, const ScoreOracle& base, const Matrix& candidates,
                                        std::size_t mc_samples, std::uint64_t seed) {
  require(candidates.rows() >= 1, "taylor_residual_min needs at least one candidate");
  TaylorResidualSweep s;
  s.candidates = candidates;
  s.residuals.resize(candidates.rows());
  for (Index c = 0; c < candidates.rows(); ++c) {
    s.residuals(c) = taylor_residual(e, base, candidates.row(c).transpose(), mc_samples, seed);
  }
  s.epsilon = s.residuals.minCoeff(&s.best);
  s.best_x0 = candidates.row(s.best).transpose();
  return s;
}

namespace {

using DD = Dual<Dual<double>>;

void check_smooth_at(const Encoder& e, const Vector& x) {
  if (e.smoothness() == Smoothness::kPiecewiseLinear && e.at_kink(x)) {
    throw DistributionalCurvature("encoder '" + e.name() +
                                  "' is on a kink: distributional curvature (second derivative is a Dirac mass)");
  }
}

// d^2/da db of sum_i s_i E_i(x + a u + b w) at a = b = 0.
double mixed_second(const Encoder& e, const Vector& x, const Vector& s, const Vector& u, const Vector& w) {
  std::vector<DD> in(static_cast<std::size_t>(x.size()));
  for (Index l = 0; l < x.size(); ++l) in[static_cast<std::size_t>(l)] = DD(Dual<double>(x(l), u(l)), Dual<double>(w(l), 0.0));
  const auto out = e.apply_generic(in);
  double acc = 0.0;
  for (Index i = 0; i < s.size(); ++i) acc += s(i) * out[static_cast<std::size_t>(i)].d.d;
  return acc;
}

}  // namespace

Matrix curvature_injection_matrix(const Encoder& e, const Vector& x, const Vector& latent_score) {
  require(latent_score.size() == e.output_dim(), "latent score must have the encoder's output dimension");
  check_smooth_at(e, x);
  const Index d = e.input_dim();
  Matrix k(d, d);
  const Matrix eye = Matrix::Identity(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index b = a; b < d; ++b) k(a, b) = k(b, a) = mixed_second(e, x, latent_score, eye.col(a), eye.col(b));
  return k;
}

Vector curvature_injection_vp(const Encoder& e, const Vector& x, const Vector& latent_score, const Vector& v) {
  require(latent_score.size() == e.output_dim(), "latent score must have the encoder's output dimension");
  require(v.size() == e.input_dim(), "direction must have the encoder's input dimension");
  check_smooth_at(e, x);
  const Index d = e.input_dim();
  Vector out(d);
  const Matrix eye = Matrix::Identity(d, d);
  for (Index a = 0; a < d; ++a) out(a) = mixed_second(e, x, latent_score, eye.col(a), v);
  return out;
}

Vector curvature_injection(const Encoder& e, const Vector& x, const Vector& latent_score) {
  return curvature_injection_matrix(e, x, latent_score).colwise().squaredNorm().transpose();
}

}  // namespace diffu
