#include "diffu/bench/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <memory>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "diffu/common/parallel.hpp"
#include "diffu/common/rng.hpp"
#include "diffu/encoders/geometry.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/report/json_io.hpp"
#include "diffu/toy/model_oracle.hpp"

namespace diffu::bench {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Trains a toy model on `data` and wraps it as an oracle sampling from the
// same data.
std::shared_ptr<const ScoreOracle> trained_oracle(const Matrix& data, const toy::TrainConfig& cfg) {
  auto ck = std::make_shared<toy::Checkpoint>(
      toy::train(cfg, data, toy::NoiseSchedule::ve(), toy::default_embedding(data.cols())));
  auto atoms = std::make_shared<EmpiricalMeasure>(data);
  return std::make_shared<toy::ModelScoreOracle>(std::move(ck), std::move(atoms));
}

Matrix gaussian_atoms(std::size_t n, Index k, std::uint64_t seed) {
  return standard_normal_rows(static_cast<Index>(n), k, seed);
}

}  // namespace

bool ExperimentOutput::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

std::vector<std::string> write_experiment(const ExperimentOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> files;
  report::write_csv((fs::path(dir) / "results.csv").string(), out.results);
  files.emplace_back("results.csv");
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : out.verdicts) verdicts.push_back(v.to_json());
  report::write_json((fs::path(dir) / "verdicts.json").string(),
                     {{"experiment", out.name}, {"pass", out.all_pass()}, {"verdicts", verdicts}, {"details", out.details}});
  files.emplace_back("verdicts.json");
  for (const auto& f : out.figures) {
    report::write_svg((fs::path(dir) / f.file).string(), f.series, f.options);
    files.push_back(f.file);
  }
  return files;
}

ScoreSource parse_score_source(const std::string& s) {
  if (s == "analytic_oracle" || s == "analytic") return ScoreSource::kAnalytic;
  if (s == "trained_model" || s == "trained") return ScoreSource::kTrained;
  fail_validation("unknown score source '" + s + "' (expected analytic_oracle or trained_model)");
}

// ---- activations ------------------------------------------------------------

namespace {

DiagnosticCurve activation_curve(const Matrix& x, const ActivationParams& p) {
  if (p.source == ScoreSource::kAnalytic) return diagnostic_sweep(EmpiricalMeasure(x), p.grid, p.sweep, p.seed);
  return diagnostic_sweep(*trained_oracle(x, p.train), p.grid, p.sweep, p.seed);
}

}  // namespace

CurvePair exp_activation_curves(const Encoder& e, const ActivationParams& p) {
  require(e.input_dim() == 2 && e.output_dim() == 2, "activation experiment expects a pointwise map on R^2");
  const Matrix x = gaussian_atoms(p.curve_atoms, 2, p.seed);
  return {activation_curve(x, p), activation_curve(encode_rows(e, x), p)};
}

FiGap activation_fi_gap(const EmpiricalMeasure& atoms, const Encoder& e, double tau, std::size_t n,
                        std::uint64_t seed) {
  const EmpiricalMeasure latent = pushforward(e, atoms);
  const Matrix xs = atoms.sample(tau, static_cast<Index>(n), seed);
  const Matrix zs = latent.sample(tau, static_cast<Index>(n), seed);
  std::vector<double> a(n), b(n), d(n);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      a[i] = atoms.score(xs.row(static_cast<Index>(i)).transpose(), tau).squaredNorm();
      b[i] = latent.score(zs.row(static_cast<Index>(i)).transpose(), tau).squaredNorm();
      d[i] = b[i] - a[i];
    }
  });
  FiGap g;
  g.encoder = e.name();
  g.fi_pixel = pairwise_sum(a) / static_cast<double>(n);
  g.fi_latent = pairwise_sum(b) / static_cast<double>(n);
  const MeanStd ms = mean_and_stderr(d);
  g.gap = std::abs(ms.mean);
  g.gap_stderr = ms.std_error;
  return g;
}

ExperimentOutput run_activation(const ActivationParams& p) {
  ExperimentOutput out;
  out.name = "activation";
  out.results.header = {"encoder_id", "tau", "fi_pixel", "fi_latent", "fir_pixel", "fir_latent"};
  const EmpiricalMeasure gap_atoms(gaussian_atoms(p.atoms, 2, p.seed));

  Figure fig{"fi_curves.svg", {}, {"FI of N(0, I2) and pointwise encodings", "tau", "FI"}};
  std::vector<FiGap> gaps;
  nlohmann::json names = nlohmann::json::array();
  const Matrix curve_x = gaussian_atoms(p.curve_atoms, 2, p.seed);
  const DiagnosticCurve pixel = activation_curve(curve_x, p);
  {
    report::Series s{"pixel", pixel.grid.values, {}};
    for (const auto& f : pixel.fi) s.y.push_back(f.mean);
    fig.series.push_back(std::move(s));
  }
  for (std::size_t id = 0; id < p.encoders.size(); ++id) {
    const Encoder e = Encoder::parse(p.encoders[id], 2);
    require(e.output_dim() == 2, "activation experiment expects pointwise encoders");
    names.push_back(e.name());
    const DiagnosticCurve latent = activation_curve(encode_rows(e, curve_x), p);
    report::Series s{e.name(), latent.grid.values, {}};
    for (std::size_t i = 0; i < latent.size(); ++i) {
      s.y.push_back(latent.fi[i].mean);
      out.results.rows.push_back(
          {static_cast<double>(id), latent.grid[i], pixel.fi[i].mean, latent.fi[i].mean, pixel.fir[i].mean, latent.fir[i].mean});
    }
    fig.series.push_back(std::move(s));
    gaps.push_back(activation_fi_gap(gap_atoms, e, p.gap_tau, p.gap_samples, p.seed));
  }
  out.figures.push_back(std::move(fig));
  out.details["encoders"] = names;

  nlohmann::json gj = nlohmann::json::array();
  for (const auto& g : gaps) {
    gj.push_back({{"encoder", g.encoder}, {"fi_pixel", g.fi_pixel}, {"fi_latent", g.fi_latent}, {"gap", g.gap},
                  {"gap_stderr", g.gap_stderr}});
  }
  out.details["fi_gaps"] = gj;
  out.details["gap_tau"] = p.gap_tau;

  auto find = [&](const std::string& name) -> const FiGap* {
    for (const auto& g : gaps)
      if (g.encoder == name) return &g;
    return nullptr;
  };
  if (const FiGap* relu = find("relu"); relu) {
    if (const FiGap* tanh_gap = find("tanh"); tanh_gap) {
      BoundCheckResult r;
      r.name = "relu_gap_exceeds_tanh";
      r.add("relu", relu->gap, relu->gap_stderr);
      r.add("tanh", tanh_gap->gap, tanh_gap->gap_stderr);
      r.pass = relu->gap > tanh_gap->gap;
      r.tolerance = "|FI_latent - FI_pixel| at tau=" + fmt(p.gap_tau) + ": relu > tanh (reference column = stderr)";
      out.verdicts.push_back(std::move(r));
    }
  }
  BoundCheckResult leaky;
  leaky.name = "leaky_relu_gap_decreasing_in_alpha";
  std::vector<double> series;
  for (const auto& g : gaps) {
    if (g.encoder.rfind("leaky_relu:", 0) == 0) {
      leaky.add(g.encoder, g.gap, g.gap_stderr);
      series.push_back(g.gap);
    }
  }
  if (series.size() >= 2) {
    leaky.pass = decreasing_violations(series) == 0;
    leaky.tolerance = "strictly decreasing over increasing alpha, no violations";
    out.verdicts.push_back(std::move(leaky));
  }
  return out;
}

// ---- linear near-isometry ---------------------------------------------------

double linear_delta_deviation(double delta0, double tau) {
  const double amb = 2.0 / ((1.0 + tau) * (1.0 + tau));
  const double lat = 1.0 / ((1.0 + delta0 + tau) * (1.0 + delta0 + tau)) + 1.0 / ((1.0 - delta0 + tau) * (1.0 - delta0 + tau));
  return fir_deviation(amb, lat);
}

ExperimentOutput exp_linear_delta(const LinearDeltaParams& p) {
  for (double d : p.deltas) require(d > 0.0 && d < 1.0, "delta0 values must lie in (0, 1)");
  ExperimentOutput out;
  out.name = "linear_delta";
  out.results.header = {"tau", "delta0", "fir_ambient", "fir_latent", "deviation"};
  if (p.mc_samples > 0) {
    out.results.header.insert(out.results.header.end(), {"mc_fir_ambient", "mc_fir_latent", "mc_deviation"});
  }
  if (p.trained) out.results.header.push_back("trained_deviation");

  const GaussianMeasure base = GaussianMeasure::standard(2);
  std::shared_ptr<const ScoreOracle> trained_base;
  if (p.trained) trained_base = trained_oracle(gaussian_atoms(p.train.dataset_size, 2, p.seed), p.train);
  std::vector<std::shared_ptr<const ScoreOracle>> trained_latent;
  if (p.trained) {
    for (double d : p.deltas) {
      const Encoder e = Encoder::linear_diag(d);
      trained_latent.push_back(trained_oracle(encode_rows(e, gaussian_atoms(p.train.dataset_size, 2, p.seed)), p.train));
    }
  }
  const std::size_t trained_n = p.mc_samples > 0 ? p.mc_samples : 1000;

  Figure fig{"deviation_vs_delta.svg", {}, {"FIR deviation, linear near-isometry", "delta0", "D_R"}};
  fig.options.x_scale = report::AxisScale::kLinear;
  for (double tau : p.taus) {
    report::Series s{"tau=" + fmt(tau), {}, {}, true};
    for (std::size_t i = 0; i < p.deltas.size(); ++i) {
      const double d = p.deltas[i];
      const Matrix a = Vector(Eigen::Vector2d(std::sqrt(1.0 + d), std::sqrt(1.0 - d))).asDiagonal();
      const GaussianMeasure latent = base.affine(a, Vector::Zero(2));
      const double ra = gaussian_fir_exact(base, tau);
      const double rl = gaussian_fir_exact(latent, tau);
      std::vector<double> row = {tau, d, ra, rl, fir_deviation(ra, rl)};
      if (p.mc_samples > 0) {
        const double ma = estimate_fir_jvp(base, tau, p.mc_samples, p.m_probes, p.seed).mean;
        const double ml = estimate_fir_jvp(latent, tau, p.mc_samples, p.m_probes, p.seed).mean;
        row.insert(row.end(), {ma, ml, fir_deviation(ma, ml)});
      }
      if (p.trained) {
        const double ma = estimate_fir_jvp(*trained_base, tau, trained_n, p.m_probes, p.seed).mean;
        const double ml = estimate_fir_jvp(*trained_latent[i], tau, trained_n, p.m_probes, p.seed).mean;
        row.push_back(fir_deviation(ma, ml));
      }
      s.x.push_back(d);
      s.y.push_back(row[4]);
      out.results.rows.push_back(std::move(row));
    }
    fig.series.push_back(std::move(s));
  }
  report::Series ref{"y = 1.25 delta0", {0.0, p.deltas.back()}, {0.0, 1.25 * p.deltas.back()}};
  fig.series.push_back(std::move(ref));
  out.figures.push_back(std::move(fig));

  std::vector<double> dev;
  for (double d : p.deltas) dev.push_back(linear_delta_deviation(d, p.check_tau));
  BoundCheckResult mono;
  mono.name = "linear_delta_monotone";
  for (std::size_t i = 0; i < dev.size(); ++i) mono.add("delta0=" + fmt(p.deltas[i]), dev[i], 1.25 * p.deltas[i]);
  mono.pass = increasing_violations(dev) == 0;
  mono.tolerance = "analytic D_R strictly increasing in delta0 at tau=" + fmt(p.check_tau) + ", no violations";
  out.verdicts.push_back(mono);

  BoundCheckResult slope = mono;
  slope.name = "linear_delta_slope";
  const LineFit f0 = fit_through_origin(p.deltas, dev);
  const LineFit f1 = fit_line(p.deltas, dev);
  slope.slope = f0.slope;
  slope.intercept = 0.0;
  slope.r_squared = f0.r_squared;
  slope.pass = f0.slope >= 0.5 && f0.slope <= 2.5;
  slope.tolerance = "least-squares slope through the origin in [0.5, 2.5] (reference 1.25)";
  slope.detail = "free-intercept fit: slope " + fmt(f1.slope) + ", intercept " + fmt(f1.intercept);
  out.verdicts.push_back(slope);
  return out;
}

// ---- zero padding -----------------------------------------------------------

double dimension_scaled_deviation(Index big_d, Index d, Index m, double tau) {
  const double intrinsic = static_cast<double>(m) / ((1.0 + tau) * (1.0 + tau));
  const double ra = intrinsic + static_cast<double>(big_d - m) / (tau * tau);
  const double rl = intrinsic + static_cast<double>(d - m) / (tau * tau);
  return fir_deviation_scaled(ra, rl, big_d, d, m);
}

ExperimentOutput exp_dimension(const DimensionParams& p) {
  for (Index d : p.ds) require(d > p.m && d <= p.big_d, "padding targets need m < d <= D");
  ExperimentOutput out;
  out.name = "dimension";
  out.results.header = {"tau", "d", "fir_ambient", "fir_latent", "scaled_deviation", "reference_line"};
  const SubspaceGaussian amb = SubspaceGaussian::coordinate(p.m, p.big_d);
  Figure fig{"scaled_deviation_vs_d.svg", {}, {"Scaled FIR deviation under zero padding", "d", "D_R^sc"}};
  fig.options.x_scale = report::AxisScale::kLinear;
  fig.options.y_scale = report::AxisScale::kLinear;
  const double denom = static_cast<double>(p.big_d - p.m);
  for (double tau : p.taus) {
    report::Series s{"tau=" + fmt(tau), {}, {}, true};
    for (Index d : p.ds) {
      const SubspaceGaussian lat = SubspaceGaussian::coordinate(p.m, d);
      const double ra = subspace_fir_exact(amb, tau);
      const double rl = subspace_fir_exact(lat, tau);
      const double dev = fir_deviation_scaled(ra, rl, p.big_d, d, p.m);
      const double ref = static_cast<double>(p.big_d - d) / denom;
      out.results.rows.push_back({tau, static_cast<double>(d), ra, rl, dev, ref});
      s.x.push_back(static_cast<double>(d));
      s.y.push_back(dev);
    }
    fig.series.push_back(std::move(s));
  }
  report::Series line{"(D-d)/(D-2)", {}, {}};
  for (Index d : p.ds) {
    line.x.push_back(static_cast<double>(d));
    line.y.push_back(static_cast<double>(p.big_d - d) / static_cast<double>(p.big_d - 2));
  }
  fig.series.push_back(std::move(line));
  out.figures.push_back(std::move(fig));

  std::vector<double> dev, ref, xs;
  BoundCheckResult mono;
  mono.name = "dimension_decreasing";
  for (Index d : p.ds) {
    dev.push_back(dimension_scaled_deviation(p.big_d, d, p.m, p.check_tau));
    ref.push_back(static_cast<double>(p.big_d - d) / static_cast<double>(p.big_d - 2));
    mono.add("d=" + std::to_string(d), dev.back(), ref.back());
  }
  mono.pass = decreasing_violations(dev) == 0;
  mono.tolerance = "analytic D_R^sc strictly decreasing in d at tau=" + fmt(p.check_tau) + ", no violations";
  out.verdicts.push_back(mono);

  BoundCheckResult fit = mono;
  fit.name = "dimension_linear_trend";
  const LineFit f = fit_line(ref, dev);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.r_squared = f.r_squared;
  fit.pass = f.r_squared > 0.9;
  fit.tolerance = "R^2 of D_R^sc against (D-d)/(D-2) above 0.9";
  fit.detail = "uncentred R^2 through the origin: " + fmt(fit_through_origin(ref, dev).r_squared);
  out.verdicts.push_back(fit);

  if (std::find(p.ds.begin(), p.ds.end(), p.big_d) != p.ds.end()) {
    BoundCheckResult eq;
    eq.name = "dimension_full_width_matches_plain";
    const double ra = subspace_fir_exact(amb, p.check_tau);
    const double scaled = fir_deviation_scaled(ra, ra, p.big_d, p.big_d, p.m);
    const double plain = fir_deviation(ra, ra);
    eq.add("d=D", scaled, plain);
    eq.pass = std::abs(scaled - plain) <= 1e-15;
    eq.tolerance = "|scaled - plain| <= 1e-15 at d = D";
    out.verdicts.push_back(eq);
  }
  return out;
}

// ---- cylinder ---------------------------------------------------------------

namespace {

Matrix plane_atoms(std::size_t n, std::uint64_t seed) {
  Matrix x = Matrix::Zero(static_cast<Index>(n), 3);
  x.leftCols(2) = gaussian_atoms(n, 2, seed);
  return x;
}

}  // namespace

ExperimentOutput exp_cylinder(const CylinderParams& p) {
  for (double e : p.eps) require(e > 0.0, "eps0 values must be > 0");
  ExperimentOutput out;
  out.name = "cylinder";
  out.results.header = {"tau", "eps0", "fir_ambient", "fir_latent", "fir_latent_stderr", "deviation", "deviation_stderr"};
  const SubspaceGaussian plane = SubspaceGaussian::coordinate(2, 3);
  const Matrix atoms = plane_atoms(p.atoms, p.seed);

  Figure fig{"deviation_vs_tau.svg", {}, {"FIR deviation, cylinder wrap", "tau", "D_R^sc"}};
  fig.options.x_scale = report::AxisScale::kLog;
  fig.options.y_scale = report::AxisScale::kLog;
  std::vector<std::vector<double>> dev_by_eps;
  std::vector<std::vector<double>> se_by_eps;
  nlohmann::json audit = nlohmann::json::array();
  BoundCheckResult taylor;
  taylor.name = "cylinder_taylor_residual";
  BoundCheckResult iso;
  iso.name = "cylinder_isometry_defect";
  for (double eps : p.eps) {
    const Encoder enc = Encoder::cylinder(eps);
    const EmpiricalMeasure latent(encode_rows(enc, atoms));
    report::Series s{"eps0=" + fmt(eps), {}, {}};
    std::vector<double> devs, ses;
    for (double tau : p.taus) {
      const double ra = subspace_fir_exact(plane, tau);
      const EstimateWithError rl = estimate_fir_jvp(latent, tau, p.n, p.m_probes, p.seed);
      const double dev = fir_deviation_scaled(ra, rl.mean, 3, 3, 2);
      const double dev_se = ra / (rl.mean * rl.mean) * rl.clustered_std_error;
      out.results.rows.push_back({tau, eps, ra, rl.mean, rl.clustered_std_error, dev, dev_se});
      s.x.push_back(tau);
      s.y.push_back(dev);
      devs.push_back(dev);
      ses.push_back(dev_se);
    }
    fig.series.push_back(std::move(s));
    dev_by_eps.push_back(std::move(devs));
    se_by_eps.push_back(std::move(ses));

    const DerivedParams dp = derive_params(enc, plane, 256, p.residual_samples, p.seed);
    const double expected = std::sqrt(1.5) * eps;
    taylor.add("eps0=" + fmt(eps), dp.epsilon, expected);
    iso.add("eps0=" + fmt(eps), dp.delta, 0.0);
    audit.push_back({{"eps0", eps},
                     {"delta", dp.delta},
                     {"epsilon", dp.epsilon},
                     {"sqrt_1_5_eps0", expected},
                     {"best_x0", std::vector<double>(dp.best_x0.data(), dp.best_x0.data() + dp.best_x0.size())}});
  }
  out.figures.push_back(std::move(fig));
  out.details["audit"] = audit;

  taylor.pass = true;
  for (std::size_t i = 0; i < taylor.measured.size(); ++i) {
    if (!(std::abs(taylor.measured[i] - taylor.reference[i]) <= 0.02 * taylor.reference[i])) taylor.pass = false;
  }
  taylor.tolerance = "taylor_residual minimum within 2% of sqrt(1.5) eps0";
  out.verdicts.push_back(taylor);

  iso.pass = true;
  for (double d : iso.measured)
    if (!(d <= 1e-10)) iso.pass = false;
  iso.tolerance = "isometry defect <= 1e-10 on the plane";
  out.verdicts.push_back(iso);

  const auto it = std::find(p.taus.begin(), p.taus.end(), p.check_tau);
  if (it != p.taus.end()) {
    const auto col = static_cast<std::size_t>(it - p.taus.begin());
    BoundCheckResult mono;
    mono.name = "cylinder_monotone_in_eps";
    std::vector<double> v;
    int violations = 0;
    for (std::size_t e = 0; e < p.eps.size(); ++e) {
      v.push_back(dev_by_eps[e][col]);
      mono.add("eps0=" + fmt(p.eps[e]), dev_by_eps[e][col], se_by_eps[e][col]);
      if (e > 0 && !(v[e] > v[e - 1])) {
        // One violation is tolerated when the two Monte Carlo values overlap.
        const double joint = 3.0 * std::hypot(se_by_eps[e][col], se_by_eps[e - 1][col]);
        violations += (v[e - 1] - v[e] <= joint) ? 1 : 2;
      }
    }
    mono.pass = violations <= 1;
    mono.tolerance = "D_R^sc increasing in eps0 at tau=" + fmt(p.check_tau) +
                     "; at most one violation, only where values are within 3 joint stderr (reference column = stderr)";
    out.verdicts.push_back(mono);
  }

  if (p.small_eps > 0.0) {
    BoundCheckResult limit;
    limit.name = "cylinder_flat_limit";
    auto dev_at = [&](double eps) {
      const EmpiricalMeasure latent(encode_rows(Encoder::cylinder(eps), atoms));
      const double ra = subspace_fir_exact(plane, p.check_tau);
      return fir_deviation(ra, estimate_fir_jvp(latent, p.check_tau, p.n, p.m_probes, p.seed).mean);
    };
    const double lo = dev_at(p.small_eps);
    const double hi = dev_at(0.2);
    limit.add("eps0=" + fmt(p.small_eps), lo, hi);
    limit.pass = lo < hi;
    limit.tolerance = "deviation at eps0=" + fmt(p.small_eps) + " below deviation at eps0=0.2 (tau=" + fmt(p.check_tau) +
                      "; reference column = eps0=0.2 value)";
    out.verdicts.push_back(limit);
  }

  BoundCheckResult slope;
  slope.name = "cylinder_loglog_slope";
  std::vector<double> small_taus;
  for (double t : p.taus)
    if (t >= 1e-3 - 1e-15 && t <= 1e-1 + 1e-15) small_taus.push_back(t);
  slope.pass = small_taus.size() >= 2;
  for (std::size_t e = 0; e < p.eps.size(); ++e) {
    std::vector<double> y;
    std::vector<double> x;
    for (std::size_t i = 0; i < p.taus.size(); ++i) {
      if (p.taus[i] >= 1e-3 - 1e-15 && p.taus[i] <= 1e-1 + 1e-15 && dev_by_eps[e][i] > 0.0) {
        x.push_back(p.taus[i]);
        y.push_back(dev_by_eps[e][i]);
      }
    }
    double s = std::numeric_limits<double>::quiet_NaN();
    if (x.size() >= 2) s = fit_loglog(x, y).slope;
    slope.add("eps0=" + fmt(p.eps[e]), s, -0.5);
    if (!(s >= -0.7 && s <= -0.3)) slope.pass = false;
  }
  slope.tolerance = "log-log slope of deviation vs tau over [1e-3, 1e-1] in [-0.7, -0.3] for every eps0";
  out.verdicts.push_back(slope);
  return out;
}

// ---- lemma and theorem checks -----------------------------------------------

std::vector<BoundCheckResult> check_lemma_normal(const LemmaParams& p) {
  BoundCheckResult exact;
  exact.name = "lemma_normal_exact";
  exact.pass = true;
  BoundCheckResult mc;
  mc.name = "lemma_normal_monte_carlo";
  mc.pass = true;
  const SubspaceGaussian intrinsic = SubspaceGaussian::coordinate(p.m, p.m);
  for (Index k : p.ks) {
    require(k >= p.m, "ambient dimension must be >= m");
    const SubspaceGaussian s = SubspaceGaussian::coordinate(p.m, k);
    for (double tau : p.taus) {
      const std::string label = "k=" + std::to_string(k) + ",tau=" + fmt(tau);
      const double diff = subspace_fir_exact(s, tau) - subspace_fir_exact(intrinsic, tau);
      const double ref = static_cast<double>(k - p.m) / (tau * tau);
      exact.add(label, diff, ref);
      if (!(std::abs(diff - ref) <= 1e-10 * std::max(1.0, std::abs(ref)))) exact.pass = false;

      const EstimateWithError est = estimate_fir_jvp(s, tau, p.n, p.m_probes, p.seed);
      const double truth = subspace_fir_exact(s, tau);
      mc.add(label, est.mean, truth);
      if (!(std::abs(est.mean - truth) <= 3.0 * est.clustered_std_error + 1e-12 * truth)) mc.pass = false;
    }
  }
  exact.tolerance = "|difference - (k-m)/tau^2| <= 1e-10 * max(1, (k-m)/tau^2)";
  mc.tolerance = "|MC - exact| <= 3 clustered stderr + 1e-12 * exact (rounding slack for zero-variance cases)";
  return {exact, mc};
}

BoundCheckResult check_fi_bounds(const Encoder& e, const SubspaceGaussian& mu, const TauGrid& grid) {
  require(e.is_linear(), "check_fi_bounds needs a linear encoder");
  require(e.input_dim() == mu.dim(), "encoder input dimension must match the measure");
  const Matrix ju = e.jacobian(Vector::Zero(mu.dim())).matrix * mu.embedding();
  Eigen::JacobiSVD<Matrix> svd(ju);
  const Vector sv = svd.singularValues();
  const double c_lo = sv.minCoeff();
  const double c_hi = sv.maxCoeff();
  if (!(c_lo > 1e-12 * std::max(1.0, c_hi))) {
    throw ValidationError("encoder is rank-deficient on the tangent space (smallest singular value " + fmt(c_lo) + ")");
  }
  // Intrinsic coordinates of the image plane.
  Eigen::HouseholderQR<Matrix> qr(ju);
  const Matrix q = qr.householderQ() * Matrix::Identity(ju.rows(), ju.cols());
  const Matrix b = q.transpose() * ju;
  const Matrix cov_lat = b * mu.intrinsic_covariance() * b.transpose();
  const GaussianMeasure latent(Vector::Zero(cov_lat.rows()), 0.5 * (cov_lat + cov_lat.transpose()));

  BoundCheckResult r;
  r.name = "fi_sandwich[" + e.name() + "]";
  r.pass = true;
  for (double tau : grid.values) {
    const double amb = gaussian_fi_exact(mu.intrinsic(), tau);
    const double lat = gaussian_fi_exact(latent, tau);
    r.add("tau=" + fmt(tau), lat, amb);
    const double lower = amb / (c_hi * c_hi);
    const double upper = amb / (c_lo * c_lo);
    const double slack = 1e-12 * upper;
    if (!(lat >= lower - slack && lat <= upper + slack)) r.pass = false;
  }
  r.tolerance = "I_latent in [I_ambient / C^2, I_ambient / c^2] with 1e-12 relative slack";
  r.detail = "c = " + fmt(c_lo) + ", C = " + fmt(c_hi);
  return r;
}

TheoremScenario parse_scenario(const std::string& s) {
  if (s == "linear_delta") return TheoremScenario::kLinearDelta;
  if (s == "dimension") return TheoremScenario::kDimension;
  if (s == "cylinder") return TheoremScenario::kCylinder;
  fail_validation("unknown scenario '" + s + "' (expected linear_delta, dimension, cylinder)");
}

BoundCheckResult check_thm1_thm2(TheoremScenario scenario, std::uint64_t seed) {
  BoundCheckResult r;
  const double tau = 0.05;
  if (scenario == TheoremScenario::kLinearDelta) {
    r.name = "theorem1_linear_delta";
    std::vector<double> ds = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> dev;
    double c_bound = 0.0;
    r.add("delta0=0", linear_delta_deviation(0.0, tau), 0.0);
    for (double d : ds) {
      dev.push_back(linear_delta_deviation(d, tau));
      c_bound = std::max(c_bound, dev.back() / d);
      r.add("delta0=" + fmt(d), dev.back(), d);
    }
    const LineFit f = fit_through_origin(ds, dev);
    r.slope = f.slope;
    r.intercept = 0.0;
    r.r_squared = f.r_squared;
    r.pass = r.measured.front() == 0.0 && std::isfinite(c_bound) && increasing_violations(dev) == 0 &&
             f.slope >= 0.5 && f.slope <= 2.5;
    r.tolerance = "D_R(0) = 0; D_R <= C delta with finite C; increasing in delta; fitted C in [0.5, 2.5] (tau=0.05)";
    r.detail = "smallest valid C = " + fmt(c_bound);
    return r;
  }
  if (scenario == TheoremScenario::kDimension) {
    r.name = "theorem1_dimension";
    const Index big_d = 512, m = 2;
    std::vector<double> dev;
    double c_bound = 0.0;
    bool full_zero = true;
    for (Index d : {4, 16, 64, 128, 256, 512}) {
      const double v = dimension_scaled_deviation(big_d, d, m, tau);
      const double form = static_cast<double>(big_d - d) / static_cast<double>(big_d - m);
      dev.push_back(v);
      r.add("d=" + std::to_string(d), v, form);
      if (form > 0.0) {
        c_bound = std::max(c_bound, v / form);
      } else if (v != 0.0) {
        full_zero = false;
      }
    }
    r.pass = std::isfinite(c_bound) && full_zero && decreasing_violations(dev) == 0;
    r.tolerance = "D_R^sc <= C (D-d)/(D-m) with finite C (delta = 0); zero at d = D; decreasing in d (tau=0.05)";
    r.detail = "max residual ratio D_R^sc / ((D-d)/(D-m)) = " + fmt(c_bound);
    return r;
  }
  r.name = "theorem2_cylinder";
  CylinderParams p;
  p.eps = {0.2};
  p.seed = seed;
  const Encoder enc = Encoder::cylinder(0.2);
  const SubspaceGaussian plane = SubspaceGaussian::coordinate(2, 3);
  const DerivedParams dp = derive_params(enc, plane, 256, p.residual_samples, seed);
  const EmpiricalMeasure latent(encode_rows(enc, [&] {
    Matrix x = Matrix::Zero(static_cast<Index>(p.atoms), 3);
    x.leftCols(2) = gaussian_atoms(p.atoms, 2, seed);
    return x;
  }()));
  std::vector<double> xs, ys;
  double c_bound = 0.0;
  for (double t : p.taus) {
    const double ra = subspace_fir_exact(plane, t);
    const double rl = estimate_fir_jvp(latent, t, p.n, p.m_probes, seed).mean;
    const double dev = fir_deviation(ra, rl);
    const double form = dp.delta + dp.epsilon / std::sqrt(t);
    r.add("tau=" + fmt(t), dev, form);
    c_bound = std::max(c_bound, dev / form);
    if (dev > 0.0) {
      xs.push_back(t);
      ys.push_back(dev);
    }
  }
  if (xs.size() >= 2) {
    const LineFit f = fit_loglog(xs, ys);
    r.slope = f.slope;
    r.intercept = f.intercept;
    r.r_squared = f.r_squared;
  }
  r.pass = std::isfinite(c_bound) && r.slope >= -0.7 && r.slope <= -0.3;
  r.tolerance = "D_R^sc <= C (delta + eps/sqrt(tau)) with finite C; log-log slope over tau in [1e-3, 1e-1] within [-0.7, -0.3]";
  r.detail = "eps0 = 0.2, delta = " + fmt(dp.delta) + ", eps = " + fmt(dp.epsilon) + ", smallest valid C = " + fmt(c_bound);
  return r;
}

DerivedParams derive_params(const Encoder& e, const SubspaceGaussian& mu, std::size_t points, std::size_t mc_samples,
                            std::uint64_t seed) {
  require(e.input_dim() == mu.dim(), "encoder input dimension must match the measure");
  DerivedParams out;
  const Matrix pts = mu.sample(0.0, static_cast<Index>(std::max<std::size_t>(points, 1)), seed);
  for (Index i = 0; i < pts.rows(); ++i) {
    out.delta = std::max(out.delta, isometry_defect(e, pts.row(i).transpose(), mu.embedding()));
  }
  const TaylorResidualSweep sweep = taylor_residual_min(e, mu, axis_grid(mu), mc_samples, seed);
  out.epsilon = sweep.epsilon;
  out.best_x0 = sweep.best_x0;
  const Index big_d = e.input_dim();
  const Index d = e.output_dim();
  const Index m = mu.intrinsic_dim();
  out.dim_penalty = big_d > m ? static_cast<double>(big_d - d) / static_cast<double>(big_d - m) : 0.0;
  return out;
}

}  // namespace diffu::bench
