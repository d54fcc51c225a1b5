#include "diffu/measures/gaussian.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "diffu/common/error.hpp"

namespace diffu {

GaussianMeasure::GaussianMeasure(Vector mean, Matrix covariance) : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const Index k = mean_.size();
  require(k >= 1, "Gaussian measure needs dimension >= 1");
  require(cov_.rows() == k && cov_.cols() == k, "covariance must be k x k with k = mean length");
  require(mean_.allFinite() && cov_.allFinite(), "Gaussian parameters must be finite");
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12, "covariance must be symmetric within 1e-12");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_);
  require(eig.info() == Eigen::Success, "covariance eigendecomposition failed");
  eigvals_ = eig.eigenvalues();
  eigvecs_ = eig.eigenvectors();
  const double scale = std::max(1.0, eigvals_.cwiseAbs().maxCoeff());
  require(eigvals_.minCoeff() >= -1e-12 * scale, "covariance must be positive semidefinite");
  eigvals_ = eigvals_.cwiseMax(0.0);
}

GaussianMeasure GaussianMeasure::standard(Index k) { return {Vector::Zero(k), Matrix::Identity(k, k)}; }

GaussianMeasure GaussianMeasure::point_mass(Vector at) {
  const Index k = at.size();
  return {std::move(at), Matrix::Zero(k, k)};
}

std::string GaussianMeasure::id() const {
  std::ostringstream os;
  os << "gaussian(k=" << dim() << ")";
  return os.str();
}

Vector GaussianMeasure::smoothed_precision_vp(double tau, const Vector& v) const {
  Vector c = eigvecs_.transpose() * v;
  c.array() /= (eigvals_.array() + tau);
  return eigvecs_ * c;
}

Vector GaussianMeasure::score(const Vector& x, double tau) const {
  check_query(x, tau);
  return -smoothed_precision_vp(tau, x - mean_);
}

Vector GaussianMeasure::hessian_vp(const Vector& x, double tau, const Vector& v) const {
  check_query(x, tau);
  require(v.size() == dim(), "probe dimension mismatch");
  return -smoothed_precision_vp(tau, v);
}

LocalResponse GaussianMeasure::respond(const Vector& x, double tau, const Matrix& probes) const {
  check_query(x, tau);
  require(probes.rows() == dim(), "probe dimension mismatch");
  LocalResponse r;
  r.score = -smoothed_precision_vp(tau, x - mean_);
  Matrix c = eigvecs_.transpose() * probes;
  for (Index i = 0; i < c.rows(); ++i) c.row(i) /= (eigvals_(i) + tau);
  r.hvps = -(eigvecs_ * c);
  return r;
}

void GaussianMeasure::draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const {
  const Index k = dim();
  Vector z(k);
  for (Index i = 0; i < k; ++i) z(i) = rng.normal() * std::sqrt(eigvals_(i));
  out = mean_ + eigvecs_ * z;
}

GaussianMeasure GaussianMeasure::affine(const Matrix& a, const Vector& b) const {
  require(a.cols() == dim() && a.rows() == b.size(), "affine map dimension mismatch");
  Matrix c = a * cov_ * a.transpose();
  c = 0.5 * (c + c.transpose());
  return {a * mean_ + b, c};
}

Vector gaussian_score(const GaussianMeasure& g, const Point& x, double tau) { return g.score(x, tau); }

double gaussian_fi_exact(const GaussianMeasure& g, double tau) {
  check_tau(tau);
  return (g.eigenvalues().array() + tau).inverse().sum();
}

double gaussian_fir_exact(const GaussianMeasure& g, double tau) {
  check_tau(tau);
  return (g.eigenvalues().array() + tau).square().inverse().sum();
}

}  // namespace diffu
