#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include <Eigen/Dense>

#include "diffu/common/error.hpp"
#include "diffu/measures/empirical.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/measures/subspace_gaussian.hpp"

using namespace diffu;

namespace {

// log p_tau for a weighted isotropic mixture, straight from the definition.
double mixture_log_density(const Matrix& atoms, const Vector& w, const Vector& x, double tau) {
  const Index k = atoms.cols();
  std::vector<double> terms;
  double best = -1e300;
  for (Index i = 0; i < atoms.rows(); ++i) {
    const double t = std::log(w(i)) - (atoms.row(i).transpose() - x).squaredNorm() / (2 * tau);
    terms.push_back(t);
    best = std::max(best, t);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - best);
  return best + std::log(s) - 0.5 * static_cast<double>(k) * std::log(2 * M_PI * tau);
}

Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector a = x, b = x;
    a(j) += h;
    b(j) -= h;
    g(j) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Matrix random_spd(Index k, std::uint64_t seed) {
  const Matrix a = standard_normal_rows(k, k, seed);
  return a * a.transpose() / static_cast<double>(k) + 0.1 * Matrix::Identity(k, k);
}

}  // namespace

TEST(GaussianMeasure, ScoreMatchesDirectSolve) {
  const Index k = 4;
  const Matrix cov = random_spd(k, 1);
  Vector mean(k);
  mean << 0.5, -1.0, 2.0, 0.0;
  const GaussianMeasure g(mean, cov);
  const Vector x = Vector::LinSpaced(k, -1.0, 1.0);
  for (double tau : {0.01, 1.0, 50.0}) {
    const Matrix s = cov + tau * Matrix::Identity(k, k);
    const Vector expected = -s.ldlt().solve(x - mean);
    EXPECT_LT((g.score(x, tau) - expected).norm(), 1e-12 * (1 + expected.norm()));
  }
}

TEST(GaussianMeasure, ClosedFormsMatchExplicitInverse) {
  const Index k = 5;
  const Matrix cov = random_spd(k, 2);
  const GaussianMeasure g(Vector::Zero(k), cov);
  for (double tau : {1e-3, 0.3, 7.0}) {
    const Matrix inv = (cov + tau * Matrix::Identity(k, k)).inverse();
    EXPECT_NEAR(gaussian_fi_exact(g, tau), inv.trace(), 1e-10 * inv.trace());
    EXPECT_NEAR(gaussian_fir_exact(g, tau), (inv * inv).trace(), 1e-10 * (inv * inv).trace());
  }
}

TEST(GaussianMeasure, StandardNormalValues) {
  const GaussianMeasure g = GaussianMeasure::standard(2);
  // N(0, I_k) smoothed is N(0, (1 + tau) I_k).
  for (double tau : {0.1, 1.0, 10.0}) {
    EXPECT_NEAR(gaussian_fi_exact(g, tau), 2.0 / (1.0 + tau), 1e-14);
    EXPECT_NEAR(gaussian_fir_exact(g, tau), 2.0 / ((1.0 + tau) * (1.0 + tau)), 1e-14);
  }
}

TEST(GaussianMeasure, HessianVpIsMinusSmoothedPrecision) {
  const Matrix cov = random_spd(3, 3);
  const GaussianMeasure g(Vector::Zero(3), cov);
  const Vector v = Vector::LinSpaced(3, 1.0, 3.0);
  const double tau = 0.4;
  const Vector expected = -(cov + tau * Matrix::Identity(3, 3)).ldlt().solve(v);
  EXPECT_LT((g.hessian_vp(Vector::Ones(3), tau, v) - expected).norm(), 1e-12);
}

TEST(GaussianMeasure, PointMassIsPureNoise) {
  const GaussianMeasure p = GaussianMeasure::point_mass(Vector::Zero(3));
  EXPECT_NEAR(gaussian_fi_exact(p, 2.0), 3.0 / 2.0, 1e-15);
  EXPECT_NEAR(gaussian_fir_exact(p, 2.0), 3.0 / 4.0, 1e-15);
}

TEST(GaussianMeasure, AffinePushforward) {
  const GaussianMeasure g = GaussianMeasure::standard(2);
  Matrix a(2, 2);
  a << 2.0, 0.0, 0.0, 0.5;
  const GaussianMeasure h = g.affine(a, Vector::Ones(2));
  EXPECT_NEAR(h.covariance()(0, 0), 4.0, 1e-15);
  EXPECT_NEAR(h.covariance()(1, 1), 0.25, 1e-15);
  EXPECT_NEAR(h.mean()(0), 1.0, 1e-15);
}

TEST(GaussianMeasure, SampleMoments) {
  const Matrix cov = random_spd(2, 4);
  const GaussianMeasure g(Vector::Zero(2), cov);
  const double tau = 0.5;
  const Matrix x = g.sample(tau, 100000, 9);
  const Matrix emp = x.transpose() * x / static_cast<double>(x.rows());
  const Matrix expected = cov + tau * Matrix::Identity(2, 2);
  EXPECT_LT((emp - expected).cwiseAbs().maxCoeff(), 0.03);
}

TEST(ScoreOracle, SamplesShareRandomNumbersAcrossTau) {
  const GaussianMeasure p = GaussianMeasure::point_mass(Vector::Zero(3));
  const Matrix a = p.sample(0.25, 50, 4) / 0.5;
  const Matrix b = p.sample(4.0, 50, 4) / 2.0;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ScoreOracle, RejectsBadQueries) {
  const GaussianMeasure g = GaussianMeasure::standard(2);
  EXPECT_THROW(g.score(Vector::Zero(2), 0.0), ValidationError);
  EXPECT_THROW(g.score(Vector::Zero(2), -1.0), ValidationError);
  EXPECT_THROW(g.score(Vector::Zero(2), std::nan("")), ValidationError);
  EXPECT_THROW(g.score(Vector::Zero(3), 1.0), ValidationError);
}

TEST(SubspaceGaussian, NormalDirectionContribution) {
  // Each of the k - m normal directions adds 1/tau to FI and 1/tau^2 to FIR.
  const auto s = SubspaceGaussian::coordinate(2, 5);
  const auto flat = SubspaceGaussian::coordinate(2, 2);
  EXPECT_NEAR(subspace_fir_exact(s, 1.0) - subspace_fir_exact(flat, 1.0), 3.0, 1e-14);
  EXPECT_NEAR(subspace_fi_exact(s, 0.5) - subspace_fi_exact(flat, 0.5), 6.0, 1e-14);
  EXPECT_EQ(subspace_fir_exact(flat, 0.3), subspace_fir_exact(SubspaceGaussian::coordinate(2, 2), 0.3));
}

TEST(SubspaceGaussian, ScoreMatchesAmbientGaussian) {
  Matrix u(3, 2);
  u << 1, 0, 0, 1.0 / std::sqrt(2.0), 0, 1.0 / std::sqrt(2.0);
  Matrix s(2, 2);
  s << 2.0, 0.3, 0.3, 0.5;
  const SubspaceGaussian sub(u, s);
  const GaussianMeasure amb(Vector::Zero(3), u * s * u.transpose());
  const Vector x = Vector::LinSpaced(3, -0.5, 1.5);
  for (double tau : {0.05, 2.0}) {
    EXPECT_LT((sub.score(x, tau) - amb.score(x, tau)).norm(), 1e-12);
    const Vector v = Vector::Ones(3);
    EXPECT_LT((sub.hessian_vp(x, tau, v) - amb.hessian_vp(x, tau, v)).norm(), 1e-10);
  }
}

TEST(SubspaceGaussian, RejectsNonOrthonormalEmbedding) {
  Matrix u(3, 1);
  u << 1.0, 1.0, 0.0;
  EXPECT_THROW(SubspaceGaussian(u, Matrix::Identity(1, 1)), ValidationError);
}

TEST(SubspaceGaussian, SamplesStayOnSubspace) {
  const auto s = SubspaceGaussian::coordinate(2, 4);
  const Matrix x = s.sample(0.0, 100, 1);
  EXPECT_EQ(x.rightCols(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EmpiricalMeasure, ScoreMatchesLogDensityGradient) {
  const Matrix atoms = standard_normal_rows(30, 2, 5);
  const EmpiricalMeasure e(atoms);
  const Vector w = Vector::Constant(30, 1.0 / 30);
  Vector x(2);
  x << 0.3, -0.7;
  for (double tau : {0.05, 0.5, 5.0}) {
    const auto f = [&](const Vector& y) { return mixture_log_density(atoms, w, y, tau); };
    const Vector g = numeric_gradient(f, x, 1e-5 * std::sqrt(tau));
    EXPECT_LT((e.score(x, tau) - g).norm(), 1e-6 * (1 + g.norm())) << "tau=" << tau;
  }
}

TEST(EmpiricalMeasure, WeightedScoreMatchesLogDensityGradient) {
  const Matrix atoms = standard_normal_rows(10, 3, 6);
  Vector w(10);
  for (Index i = 0; i < 10; ++i) w(i) = 1.0 + static_cast<double>(i);
  w /= w.sum();
  const EmpiricalMeasure e(atoms, w);
  const Vector x = Vector::Constant(3, 0.2);
  const double tau = 0.3;
  const auto f = [&](const Vector& y) { return mixture_log_density(atoms, w, y, tau); };
  EXPECT_LT((e.score(x, tau) - numeric_gradient(f, x, 1e-5)).norm(), 1e-6);
}

TEST(EmpiricalMeasure, HessianVpMatchesScoreDifferences) {
  const EmpiricalMeasure e(standard_normal_rows(40, 3, 7));
  const Vector x = Vector::Constant(3, 0.1);
  const Vector v = Vector::LinSpaced(3, -1.0, 2.0);
  for (double tau : {0.1, 1.0}) {
    const double h = 1e-5;
    const Vector fd = (e.score(x + h * v, tau) - e.score(x - h * v, tau)) / (2 * h);
    EXPECT_LT((e.hessian_vp(x, tau, v) - fd).norm(), 1e-5 * (1 + fd.norm()));
    const LocalResponse r = e.respond(x, tau, v);
    EXPECT_LT((r.hvps.col(0) - fd).norm(), 1e-5 * (1 + fd.norm()));
  }
}

TEST(EmpiricalMeasure, RespondDensePathAgreesWithProbePath) {
  const EmpiricalMeasure e(standard_normal_rows(25, 2, 8));
  const Vector x = Vector::Constant(2, -0.4);
  const Matrix many = standard_normal_rows(2, 6, 9);  // 6 probes >= k: dense path
  const LocalResponse r = e.respond(x, 0.2, many);
  for (Index j = 0; j < many.cols(); ++j) {
    EXPECT_LT((r.hvps.col(j) - e.hessian_vp(x, 0.2, many.col(j))).norm(), 1e-12);
  }
}

TEST(EmpiricalMeasure, PruningKeepsFullAccuracy) {
  // A far cluster has log-weight far below the cutoff and must not matter.
  Matrix atoms(4, 1);
  atoms << 0.0, 0.1, 50.0, 51.0;
  const EmpiricalMeasure e(atoms);
  const auto post = e.posterior(Vector::Constant(1, 0.05), 0.01);
  EXPECT_EQ(post.support.size(), 2u);
  EXPECT_NEAR(post.support_weights.sum(), 1.0, 1e-15);
  EXPECT_NEAR(post.mean(0), 0.05, 1e-12);
}

TEST(EmpiricalMeasure, SingleAtomIsPointMass) {
  const EmpiricalMeasure e(Matrix::Zero(1, 2));
  const Vector x = Vector::Ones(2);
  EXPECT_LT((e.score(x, 0.5) + x / 0.5).norm(), 1e-15);
}

TEST(EmpiricalMeasure, RejectsBadWeights) {
  const Matrix atoms = Matrix::Zero(2, 1);
  EXPECT_THROW(EmpiricalMeasure(atoms, Vector::Constant(2, 0.7)), ValidationError);
  Vector w(2);
  w << 1.5, -0.5;
  EXPECT_THROW(EmpiricalMeasure(atoms, w), ValidationError);
}

TEST(EmpiricalMeasure, PermutedColumnsPermutesScore) {
  const EmpiricalMeasure e(standard_normal_rows(20, 3, 10));
  const std::vector<Index> perm = {2, 0, 1};
  const EmpiricalMeasure p = e.permuted_columns(perm);
  Vector x(3);
  x << 0.1, 0.2, 0.3;
  Vector px(3);
  for (Index j = 0; j < 3; ++j) px(j) = x(perm[static_cast<std::size_t>(j)]);
  const Vector s = e.score(x, 0.4);
  const Vector ps = p.score(px, 0.4);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(ps(j), s(perm[static_cast<std::size_t>(j)]), 1e-14);
  EXPECT_THROW(e.permuted_columns({0, 0, 1}), ValidationError);
}

TEST(EmpiricalMeasure, DrawIndexFollowsWeights) {
  Vector w(2);
  w << 0.25, 0.75;
  const EmpiricalMeasure e(Matrix::Identity(2, 2), w);
  int ones = 0;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    CounterRng r(1, StreamTag::kSample, i);
    ones += e.draw_index(r) == 1;
  }
  EXPECT_NEAR(ones / 20000.0, 0.75, 0.015);
}

TEST(MeasureIo, BuiltinSpecs) {
  EXPECT_EQ(make_measure("builtin:gauss2d", 0)->dim(), 2);
  EXPECT_EQ(make_measure("builtin:gauss:7", 0)->dim(), 7);
  EXPECT_EQ(make_measure("builtin:subspace:2:9", 0)->dim(), 9);
  EXPECT_EQ(make_measure("builtin:point:3", 0)->dim(), 3);
  const auto atoms = make_measure("builtin:atoms:100", 3);
  EXPECT_EQ(dynamic_cast<const EmpiricalMeasure&>(*atoms).size(), 100);
  EXPECT_THROW(make_measure("builtin:gauss:0", 0), ValidationError);
  EXPECT_THROW(make_measure("nonsense", 0), ValidationError);
  EXPECT_THROW(make_measure("builtin:unknown", 0), ValidationError);
}

TEST(MeasureIo, CsvRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "diffu_measure_io";
  std::filesystem::create_directories(dir);
  const EmpiricalMeasure e(standard_normal_rows(12, 3, 1));
  for (bool header : {false, true}) {
    const std::string path = (dir / (header ? "h.csv" : "n.csv")).string();
    save_empirical_csv(e, path, header);
    const EmpiricalMeasure back = load_empirical_csv(path, header);
    EXPECT_EQ(back.samples(), e.samples());
  }
}

TEST(MeasureIo, GaussianJsonRoundTrip) {
  const GaussianMeasure g(Vector::LinSpaced(2, 1.0, 2.0), random_spd(2, 3));
  const GaussianMeasure back = gaussian_from_json(to_json(g));
  EXPECT_EQ(back.mean(), g.mean());
  EXPECT_EQ(back.covariance(), g.covariance());
  const auto s = SubspaceGaussian::coordinate(2, 4);
  const SubspaceGaussian sb = subspace_from_json(to_json(s));
  EXPECT_EQ(sb.embedding(), s.embedding());
}

TEST(MeasureIo, StandardNormalRowsDeterministic) {
  EXPECT_EQ(standard_normal_rows(10, 3, 5), standard_normal_rows(10, 3, 5));
  EXPECT_NE(standard_normal_rows(10, 3, 5), standard_normal_rows(10, 3, 6));
}
