#include "diffu/estimators/estimators.hpp"

#include <cmath>
#include <vector>

#include "diffu/common/error.hpp"
#include "diffu/common/parallel.hpp"
#include "diffu/common/rng.hpp"

namespace diffu {

namespace {

constexpr Index kBatchRows = 256;

void check_budget(const ScoreOracle& o, std::size_t n) {
  if (!o.has_sampler()) throw CapabilityError("oracle '" + o.id() + "' has no sampler; FI needs draws from mu_tau");
  require(n >= 2, "estimator needs n >= 2 samples");
}

EstimateWithError summarize(const std::vector<double>& per_sample) {
  const MeanStd ms = mean_and_stderr(per_sample);
  EstimateWithError e;
  e.mean = ms.mean;
  e.std_error = ms.std_error;
  e.clustered_std_error = ms.std_error;
  e.n_samples = per_sample.size();
  e.n_probes = 1;
  return e;
}

// obs holds n blocks of m observations, sample-major.
EstimateWithError summarize_clustered(const std::vector<double>& obs, std::size_t n, std::size_t m) {
  const MeanStd flat = mean_and_stderr(obs);
  std::vector<double> cluster(n);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = pairwise_sum(std::span<const double>(obs.data() + i * m, m)) / static_cast<double>(m);
  }
  const MeanStd per = mean_and_stderr(cluster);
  EstimateWithError e;
  e.mean = flat.mean;
  e.std_error = flat.std_error;
  e.clustered_std_error = per.std_error;
  e.n_samples = n;
  e.n_probes = m;
  return e;
}

// Scores of every row, evaluated in fixed-size batches so the arithmetic
// does not depend on the thread count.
Matrix batched_scores(const ScoreOracle& o, const Matrix& xs, double tau) {
  Matrix out(xs.rows(), xs.cols());
  const auto batches = static_cast<std::size_t>((xs.rows() + kBatchRows - 1) / kBatchRows);
  parallel_for(batches, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const Index r0 = static_cast<Index>(c) * kBatchRows;
      const Index rows = std::min(kBatchRows, xs.rows() - r0);
      out.middleRows(r0, rows) = o.score_batch(xs.middleRows(r0, rows), tau);
    }
  });
  return out;
}

}  // namespace

const char* probe_name(ProbeKind p) { return p == ProbeKind::kRademacher ? "rademacher" : "gaussian"; }

ProbeKind parse_probe(const std::string& s) {
  if (s == "rademacher") return ProbeKind::kRademacher;
  if (s == "gaussian" || s == "normal") return ProbeKind::kGaussian;
  fail_validation("unknown probe distribution '" + s + "' (expected rademacher or gaussian)");
}

const char* fir_method_name(FirMethod m) { return m == FirMethod::kJvp ? "jvp" : "fd"; }

FirMethod parse_fir_method(const std::string& s) {
  if (s == "jvp") return FirMethod::kJvp;
  if (s == "fd") return FirMethod::kFiniteDifference;
  fail_validation("unknown FIR method '" + s + "' (expected jvp or fd)");
}

Matrix draw_probes(Index k, Index m, std::uint64_t seed, std::uint64_t sample_index, ProbeKind kind) {
  CounterRng rng(seed, StreamTag::kProbe, sample_index);
  Matrix v(k, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < k; ++i) v(i, j) = kind == ProbeKind::kRademacher ? rng.rademacher() : rng.normal();
  return v;
}

double default_fd_step(double tau) { return 1e-4 * std::sqrt(tau); }

EstimateWithError estimate_fi(const ScoreOracle& o, double tau, std::size_t n, std::uint64_t seed) {
  check_tau(tau);
  check_budget(o, n);
  const Matrix xs = o.sample(tau, static_cast<Index>(n), seed);
  const Matrix s = batched_scores(o, xs, tau);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = s.row(static_cast<Index>(i)).squaredNorm();
  return summarize(sq);
}

FiFirEstimate estimate_fi_fir(const ScoreOracle& o, double tau, std::size_t n, std::size_t m_probes,
                              std::uint64_t seed, FirMethod method, ProbeKind probes, double fd_step) {
  check_tau(tau);
  check_budget(o, n);
  require(m_probes >= 1, "FIR estimator needs at least one probe");
  if (method == FirMethod::kJvp && !o.has_hvp()) {
    throw CapabilityError("oracle '" + o.id() + "' does not provide Hessian-vector products; use the fd method");
  }
  const double h = fd_step > 0.0 ? fd_step : default_fd_step(tau);
  const Index k = o.dim();
  const auto m = static_cast<Index>(m_probes);
  const Matrix xs = o.sample(tau, static_cast<Index>(n), seed);

  std::vector<double> fi(n);
  std::vector<double> fir(n * m_probes);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vector x = xs.row(static_cast<Index>(i)).transpose();
      const Matrix v = draw_probes(k, m, seed, i, probes);
      Vector score;
      Matrix hv;
      if (method == FirMethod::kJvp) {
        LocalResponse r = o.respond(x, tau, v);
        score = std::move(r.score);
        hv = std::move(r.hvps);
      } else {
        Matrix pts(m + 1, k);
        pts.row(0) = x.transpose();
        for (Index j = 0; j < m; ++j) pts.row(j + 1) = (x + h * v.col(j)).transpose();
        const Matrix s = o.score_batch(pts, tau);
        score = s.row(0).transpose();
        hv = (s.bottomRows(m).rowwise() - s.row(0)).transpose() / h;
      }
      fi[i] = score.squaredNorm();
      for (Index j = 0; j < m; ++j) fir[i * m_probes + static_cast<std::size_t>(j)] = hv.col(j).squaredNorm();
    }
  });
  return {summarize(fi), summarize_clustered(fir, n, m_probes)};
}

EstimateWithError estimate_fir_jvp(const ScoreOracle& o, double tau, std::size_t n, std::size_t m_probes,
                                   std::uint64_t seed, ProbeKind probes) {
  return estimate_fi_fir(o, tau, n, m_probes, seed, FirMethod::kJvp, probes).fir;
}

EstimateWithError estimate_fir_fd(const ScoreOracle& o, double tau, std::size_t n, std::size_t m_probes,
                                  double fd_step, std::uint64_t seed, ProbeKind probes) {
  return estimate_fi_fir(o, tau, n, m_probes, seed, FirMethod::kFiniteDifference, probes, fd_step).fir;
}

double mmse_from_fi(double tau, Index k, double fi) {
  return tau * static_cast<double>(k) - tau * tau * fi;
}

Resistance denoising_resistance(double tau, Index k, double fi, double fir) {
  Resistance r;
  r.noise_gain = static_cast<double>(k) - 2.0 * tau * fi;
  r.complexity_penalty = tau * tau * fir;
  r.total = r.noise_gain + r.complexity_penalty;
  return r;
}

EstimateWithError empirical_mmse(const EmpiricalMeasure& e, double tau, std::size_t n, std::uint64_t seed) {
  check_tau(tau);
  require(n >= 2, "empirical_mmse needs n >= 2");
  const Index k = e.dim();
  const double scale = std::sqrt(tau);
  std::vector<double> err(n);
  parallel_for(n, [&](std::size_t b, std::size_t end) {
    Vector x(k);
    for (std::size_t i = b; i < end; ++i) {
      CounterRng rng(seed, StreamTag::kSample, i);
      const Index atom = e.draw_index(rng);
      const auto x0 = e.samples().row(atom).transpose();
      for (Index j = 0; j < k; ++j) x(j) = x0(j) + scale * rng.normal();
      err[i] = (x0 - e.posterior(x, tau).mean).squaredNorm();
    }
  });
  return summarize(err);
}

double fir_deviation(double r_ambient, double r_latent) {
  require(r_latent > 0.0, "latent FIR must be > 0 for a deviation");
  return std::abs(1.0 - r_ambient / r_latent);
}

double fir_deviation_scaled(double r_ambient, double r_latent, Index big_d, Index d, Index m) {
  require(big_d > m && d > m, "scaled deviation needs D > m and d > m");
  require(r_latent > 0.0, "latent FIR must be > 0 for a deviation");
  const double factor = static_cast<double>(d - m) / static_cast<double>(big_d - m);
  return std::abs(1.0 - factor * r_ambient / r_latent);
}

}  // namespace diffu
