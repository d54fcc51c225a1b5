#pragma once

#include <cstdint>
#include <string>

#include "diffu/measures/empirical.hpp"
#include "diffu/measures/score_oracle.hpp"

namespace diffu {

/// Monte Carlo mean with its standard error. `std_error` treats every
/// observation as independent; `clustered_std_error` first averages the
/// probes of each sample (probes at one point are correlated). For
/// single-observation-per-sample estimators the two coincide.
struct EstimateWithError {
  double mean = 0.0;
  double std_error = 0.0;
  double clustered_std_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_probes = 0;
};

enum class ProbeKind { kRademacher, kGaussian };
enum class FirMethod { kJvp, kFiniteDifference };

const char* probe_name(ProbeKind p);
ProbeKind parse_probe(const std::string& s);
const char* fir_method_name(FirMethod m);
FirMethod parse_fir_method(const std::string& s);

/// Probe matrix (k x m) for sample i: entries from stream (seed, probe, i).
Matrix draw_probes(Index k, Index m, std::uint64_t seed, std::uint64_t sample_index, ProbeKind kind);

/// (1/n) sum ||s_tau(x_i)||^2 over x_i ~ mu_tau.
EstimateWithError estimate_fi(const ScoreOracle& o, double tau, std::size_t n, std::uint64_t seed);

/// Hutchinson estimate of E ||grad s||_F^2 from (1/(nm)) sum ||H(x_i) v_ij||^2.
EstimateWithError estimate_fir_jvp(const ScoreOracle& o, double tau, std::size_t n, std::size_t m_probes,
                                   std::uint64_t seed, ProbeKind probes = ProbeKind::kRademacher);

/// Same estimator with H v replaced by (s(x + h v) - s(x)) / h. A
/// non-positive step selects the default 1e-4 sqrt(tau).
EstimateWithError estimate_fir_fd(const ScoreOracle& o, double tau, std::size_t n, std::size_t m_probes,
                                  double fd_step, std::uint64_t seed, ProbeKind probes = ProbeKind::kRademacher);

double default_fd_step(double tau);

struct FiFirEstimate {
  EstimateWithError fi;
  EstimateWithError fir;
};

/// FI and FIR from one pass over the same samples (the score evaluated for
/// FI is reused by the FIR probes).
FiFirEstimate estimate_fi_fir(const ScoreOracle& o, double tau, std::size_t n, std::size_t m_probes,
                              std::uint64_t seed, FirMethod method = FirMethod::kJvp,
                              ProbeKind probes = ProbeKind::kRademacher, double fd_step = 0.0);

/// tau k - tau^2 fi.
double mmse_from_fi(double tau, Index k, double fi);

struct Resistance {
  double total = 0.0;
  double noise_gain = 0.0;          // k - 2 tau fi
  double complexity_penalty = 0.0;  // tau^2 fir
};

/// dMMSE/dtau split into its noise-gain and complexity terms.
Resistance denoising_resistance(double tau, Index k, double fi, double fir);

/// E ||x0 - E[x0 | x]||^2 over pairs (x0, x = x0 + sqrt(tau) n).
EstimateWithError empirical_mmse(const EmpiricalMeasure& e, double tau, std::size_t n, std::uint64_t seed);

/// |1 - r_ambient / r_latent|.
double fir_deviation(double r_ambient, double r_latent);
/// |1 - ((d - m) / (D - m)) r_ambient / r_latent|.
double fir_deviation_scaled(double r_ambient, double r_latent, Index big_d, Index d, Index m);

}  // namespace diffu
