#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffu/bench/bound_check.hpp"
#include "diffu/encoders/encoder.hpp"
#include "diffu/estimators/curve.hpp"
#include "diffu/measures/subspace_gaussian.hpp"
#include "diffu/report/csv.hpp"
#include "diffu/report/svg.hpp"
#include "diffu/toy/train.hpp"

namespace diffu::bench {

struct Figure {
  std::string file;
  std::vector<report::Series> series;
  report::ChartOptions options;
};

/// Tables, verdicts and figures of one experiment run.
struct ExperimentOutput {
  std::string name;
  report::CsvTable results;
  std::vector<BoundCheckResult> verdicts;
  std::vector<Figure> figures;
  nlohmann::json details = nlohmann::json::object();

  bool all_pass() const;
};

/// Writes results.csv, verdicts.json and the figures into dir; returns the
/// file names written (relative to dir).
std::vector<std::string> write_experiment(const ExperimentOutput& out, const std::string& dir);

enum class ScoreSource { kAnalytic, kTrained };

ScoreSource parse_score_source(const std::string& s);

// ---- pointwise activations on N(0, I_2) -------------------------------------

struct ActivationParams {
  std::vector<std::string> encoders = {"relu", "leaky_relu:0.25", "leaky_relu:0.5", "leaky_relu:0.75",
                                       "leaky_relu:1", "gelu", "sigmoid", "tanh"};
  std::size_t atoms = 50000;        // atoms behind the FI gap verdicts
  std::size_t curve_atoms = 5000;   // atoms behind the plotted curves
  TauGrid grid = TauGrid::log_sqrt(0.03, 10.0, 16);
  SweepOptions sweep{500, 10};
  double gap_tau = 0.1;
  std::size_t gap_samples = 4000;
  ScoreSource source = ScoreSource::kAnalytic;
  toy::TrainConfig train;
  std::uint64_t seed = 0;
};

struct CurvePair {
  DiagnosticCurve pixel;
  DiagnosticCurve latent;
};

/// FI/FIR curves of N(0, I_2) atoms and of their pushforward under one
/// encoder, with the same seed on both sides.
CurvePair exp_activation_curves(const Encoder& e, const ActivationParams& p);

/// |FI_latent - FI_pixel| at one tau from paired draws (same atoms, noise).
struct FiGap {
  std::string encoder;
  double fi_pixel = 0.0;
  double fi_latent = 0.0;
  double gap = 0.0;
  double gap_stderr = 0.0;
};
FiGap activation_fi_gap(const EmpiricalMeasure& atoms, const Encoder& e, double tau, std::size_t n, std::uint64_t seed);

/// Curves for every encoder plus the ordering verdicts (ReLU gap above tanh,
/// leaky-ReLU gap decreasing as alpha -> 1).
ExperimentOutput run_activation(const ActivationParams& p);

// ---- linear near-isometry, Fig. 2(a) analog ---------------------------------

struct LinearDeltaParams {
  std::vector<double> deltas = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> taus = {0.001, 0.01, 0.05, 0.1, 0.5, 1.0};
  double check_tau = 0.05;
  std::size_t mc_samples = 0;  // > 0 adds Monte Carlo estimates next to the closed forms
  std::size_t m_probes = 50;
  bool trained = false;
  toy::TrainConfig train;
  std::uint64_t seed = 0;
};

/// Closed-form D_R for A = diag(sqrt(1 + d), sqrt(1 - d)) on N(0, I_2).
double linear_delta_deviation(double delta0, double tau);

ExperimentOutput exp_linear_delta(const LinearDeltaParams& p);

// ---- zero padding, Fig. 2(b) analog -----------------------------------------

struct DimensionParams {
  Index big_d = 512;
  Index m = 2;
  std::vector<Index> ds = {4, 16, 64, 128, 256, 512};
  std::vector<double> taus = {0.001, 0.01, 0.05, 0.1, 1.0};
  double check_tau = 0.05;
};

/// Scaled deviation between N(0, I_m) on m axes of R^D and its zero-padded
/// image in R^d, both from the Lemma 1 closed form.
double dimension_scaled_deviation(Index big_d, Index d, Index m, double tau);

ExperimentOutput exp_dimension(const DimensionParams& p);

// ---- cylinder wrap, Fig. 2(c) analog ----------------------------------------

struct CylinderParams {
  std::vector<double> eps = {0.05, 0.1, 0.2, 0.4};
  std::vector<double> taus = {0.001, 0.00215443469, 0.00464158883, 0.01, 0.0215443469, 0.0464158883, 0.05, 0.1};
  double check_tau = 0.05;
  double small_eps = 0.01;  // near-flat control compared against eps0 = 0.2; <= 0 skips it
  std::size_t atoms = 50000;
  std::size_t n = 2000;
  std::size_t m_probes = 10;
  std::size_t residual_samples = 100000;
  std::uint64_t seed = 0;
};

ExperimentOutput exp_cylinder(const CylinderParams& p);

// ---- theorem and lemma checks -----------------------------------------------

struct LemmaParams {
  Index m = 2;
  std::vector<Index> ks = {3, 5, 512};
  std::vector<double> taus = {0.1, 1.0, 10.0};
  std::size_t n = 1000;
  std::size_t m_probes = 50;
  std::uint64_t seed = 0;
};

/// Analytic (k - m)/tau^2 identity and Monte Carlo agreement with the closed
/// form (two verdicts).
std::vector<BoundCheckResult> check_lemma_normal(const LemmaParams& p);

/// Prop. 2 sandwich for a linear encoder acting on a flat Gaussian: latent
/// FI within [1/C^2, 1/c^2] times the tangential ambient FI, with c, C the
/// extreme singular values of J restricted to the tangent space.
BoundCheckResult check_fi_bounds(const Encoder& e, const SubspaceGaussian& mu, const TauGrid& grid);

enum class TheoremScenario { kLinearDelta, kDimension, kCylinder };
TheoremScenario parse_scenario(const std::string& s);

/// Fits the theorem's constant and checks the predicted scaling.
BoundCheckResult check_thm1_thm2(TheoremScenario scenario, std::uint64_t seed = 0);

struct DerivedParams {
  double delta = 0.0;
  double epsilon = 0.0;
  double dim_penalty = 0.0;  // (D - d) / (D - m)
  Vector best_x0;
};

/// delta = sup of isometry_defect over `points` draws from mu, epsilon =
/// min of taylor_residual over the default axis grid.
DerivedParams derive_params(const Encoder& e, const SubspaceGaussian& mu, std::size_t points = 256,
                            std::size_t mc_samples = 100000, std::uint64_t seed = 0);

}  // namespace diffu::bench
