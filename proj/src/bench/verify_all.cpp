#include "diffu/bench/verify_all.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "diffu/common/rng.hpp"
#include "diffu/encoders/encoder.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/report/json_io.hpp"
#include "diffu/report/manifest.hpp"
#include "diffu/spectra/spectrum.hpp"
#include "diffu/toy/model_oracle.hpp"

namespace diffu::bench {

namespace {

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail_validation("parameter '" + key + "': cannot parse '" + item + "' as a number");
    }
  }
  require(!out.empty(), "parameter '" + key + "' is empty");
  return out;
}

double parse_one(const std::string& key, const std::string& v) {
  const auto xs = parse_list(key, v);
  require(xs.size() == 1, "parameter '" + key + "' takes a single value");
  return xs.front();
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const double x = parse_one(key, v);
  require(x >= 1.0 && x == std::floor(x), "parameter '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(x);
}

// Fails with the valid keys when `params` contains anything outside `known`.
void check_keys(const std::string& experiment, const ParamMap& params, const std::vector<std::string>& known) {
  for (const auto& [k, v] : params) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      std::string list;
      for (const auto& s : known) list += (list.empty() ? "" : ", ") + s;
      fail_validation("unknown parameter '" + k + "' for experiment " + experiment + " (valid: " + list + ")");
    }
  }
}

ExperimentOutput run_theory(std::uint64_t seed, const ParamMap& params) {
  check_keys("theory", params, {"n", "m_probes"});
  LemmaParams lp;
  lp.seed = seed;
  if (auto it = params.find("n"); it != params.end()) lp.n = parse_count(it->first, it->second);
  if (auto it = params.find("m_probes"); it != params.end()) lp.m_probes = parse_count(it->first, it->second);

  ExperimentOutput out;
  out.name = "theory";
  out.results.header = {"check", "item", "measured", "reference"};
  for (auto& r : check_lemma_normal(lp)) out.verdicts.push_back(std::move(r));
  const SubspaceGaussian plane = SubspaceGaussian::coordinate(2, 2);
  const TauGrid grid = TauGrid::standard();
  out.verdicts.push_back(check_fi_bounds(Encoder::identity(2), plane, grid));
  out.verdicts.push_back(check_fi_bounds(Encoder::linear_diag(0.5), plane, grid));
  for (auto s : {TheoremScenario::kLinearDelta, TheoremScenario::kDimension, TheoremScenario::kCylinder}) {
    out.verdicts.push_back(check_thm1_thm2(s, seed));
  }
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t c = 0; c < out.verdicts.size(); ++c) {
    const auto& v = out.verdicts[c];
    names.push_back(v.name);
    for (std::size_t i = 0; i < v.measured.size(); ++i) {
      out.results.rows.push_back({static_cast<double>(c), static_cast<double>(i), v.measured[i], v.reference[i]});
    }
  }
  out.details["checks"] = names;

  nlohmann::json derived = nlohmann::json::array();
  auto audit = [&](const std::string& label, const Encoder& e, const SubspaceGaussian& mu) {
    const DerivedParams d = derive_params(e, mu, 256, 20000, seed);
    derived.push_back({{"encoder", label}, {"delta", d.delta}, {"epsilon", d.epsilon}, {"dim_penalty", d.dim_penalty}});
  };
  audit("linear_diag:0.3", Encoder::linear_diag(0.3), plane);
  audit("zero_pad:64 of R^512", Encoder::zero_pad(512, 64, 64), SubspaceGaussian::coordinate(2, 512));
  out.details["derived_params"] = derived;
  return out;
}

// Sinusoids with random phase and one of a few low frequencies.
Matrix sinusoid_rows(Index n, Index k, std::uint64_t seed) {
  Matrix x(n, k);
  for (Index i = 0; i < n; ++i) {
    CounterRng rng(seed, StreamTag::kDataset, static_cast<std::uint64_t>(i));
    const double phase = 2.0 * M_PI * rng.uniform();
    const double freq = 1.0 + static_cast<double>(rng.below(3));
    for (Index j = 0; j < k; ++j) x(i, j) = std::sin(2.0 * M_PI * freq * static_cast<double>(j) / static_cast<double>(k) + phase);
  }
  return x;
}

ExperimentOutput run_spectra(std::uint64_t seed, const ParamMap& params) {
  check_keys("spectra", params, {"samples", "length", "tau"});
  std::size_t samples = 10000;
  std::size_t length = 64;
  double tau = 0.1;
  if (auto it = params.find("samples"); it != params.end()) samples = parse_count(it->first, it->second);
  if (auto it = params.find("length"); it != params.end()) length = parse_count(it->first, it->second);
  if (auto it = params.find("tau"); it != params.end()) tau = parse_one(it->first, it->second);
  require(length >= 2, "spectra length must be >= 2");

  ExperimentOutput out;
  out.name = "spectra";
  const Index k = static_cast<Index>(length);
  const Matrix white = standard_normal_rows(static_cast<Index>(samples), k, seed);
  const auto ws = spectra::power_spectrum_1d(white, false, false);
  double mean = 0.0;
  for (double p : ws.power) mean += p;
  mean /= static_cast<double>(ws.power.size());
  double worst = 0.0;
  for (double p : ws.power) worst = std::max(worst, std::abs(p - mean) / mean);
  BoundCheckResult flat;
  flat.name = "white_noise_flat";
  flat.add("max relative bin deviation", worst, 0.05);
  flat.pass = worst < 0.05;
  flat.tolerance = "max |P_j - mean| / mean < 0.05";
  out.verdicts.push_back(flat);

  double energy = 0.0;
  for (Index i = 0; i < white.rows(); ++i) energy += white.row(i).squaredNorm();
  energy /= static_cast<double>(white.rows()) * static_cast<double>(k);
  BoundCheckResult parseval;
  parseval.name = "parseval";
  parseval.add("sum of bin powers", ws.total_power, energy);
  parseval.pass = std::abs(ws.total_power - energy) <= 1e-10 * std::max(1.0, energy);
  parseval.tolerance = "|sum P - mean ||x||^2 / k| <= 1e-10 * max(1, mean ||x||^2 / k)";
  out.verdicts.push_back(parseval);

  const EmpiricalMeasure sines(sinusoid_rows(200, k, seed));
  const auto perm = spectra::random_permutation(k, seed);
  const auto pc = spectra::permutation_contrast(sines, perm, tau, 500, 10, seed);
  BoundCheckResult inv;
  inv.name = "permutation_contrast";
  inv.add("fi difference", pc.fi_difference, 1e-10);
  inv.add("fir difference", pc.fir_difference, 1e-10);
  inv.add("spectrum l1", pc.spectrum_l1, 0.0);
  inv.pass = pc.fi_difference < 1e-10 && pc.fir_difference < 1e-10 && pc.spectrum_l1 > 0.0;
  inv.tolerance = "FI and FIR differences < 1e-10 (relative to nothing); spectrum L1 > 0";
  out.verdicts.push_back(inv);
  out.details["permutation"] = {{"fi_original", pc.fi_original}, {"fi_permuted", pc.fi_permuted},
                                {"fir_original", pc.fir_original}, {"fir_permuted", pc.fir_permuted},
                                {"spectrum_l1", pc.spectrum_l1}, {"tau", tau}};

  Matrix permuted(sines.samples().rows(), k);
  for (Index j = 0; j < k; ++j) permuted.col(j) = sines.samples().col(perm[static_cast<std::size_t>(j)]);
  const auto s0 = spectra::power_spectrum_1d(sines.samples(), true, true);
  const auto s1 = spectra::power_spectrum_1d(permuted, true, true);
  out.results.header = {"bin", "frequency", "power_white", "power_sinusoid", "power_permuted"};
  Figure fig{"spectra.svg", {}, {"1-D power spectra", "frequency", "power"}};
  report::Series a{"sinusoids", {}, {}}, b{"permuted", {}, {}};
  for (std::size_t i = 0; i < s0.bins.size(); ++i) {
    const auto bin = static_cast<std::size_t>(s0.bins[i]);
    out.results.rows.push_back(
        std::vector<double>{static_cast<double>(bin), s0.frequencies[i], ws.power[bin], s0.power[i], s1.power[i]});
    a.x.push_back(s0.frequencies[i]);
    a.y.push_back(s0.power[i]);
    b.x.push_back(s1.frequencies[i]);
    b.y.push_back(s1.power[i]);
  }
  fig.options.x_scale = report::AxisScale::kLinear;
  fig.series = {a, b};
  out.figures.push_back(std::move(fig));
  return out;
}

// Largest relative error between backprop and central differences over 50
// random parameters of a freshly initialized net. Step 1e-5 leaves ~1e-11 of
// roundoff in each difference, so near-zero coordinates use an absolute floor.
double gradient_check_error(std::uint64_t seed, double floor) {
  toy::MlpScoreNet net(2, toy::default_embedding(2), {16, 16});
  net.initialize(seed, false);
  const Matrix x = standard_normal_rows(2, 8, seed);
  Vector t(8);
  for (Index i = 0; i < 8; ++i) t[i] = -2.0 + 0.5 * static_cast<double>(i);
  const Matrix target = standard_normal_rows(2, 8, seed + 1);
  Vector grad;
  net.loss_and_grads(x, t, target, grad);
  CounterRng pick(seed, StreamTag::kUser, 0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto p = static_cast<Index>(pick.below(static_cast<std::uint64_t>(net.parameter_count())));
    const double keep = net.params()[p];
    const double h = 1e-5;
    net.params()[p] = keep + h;
    const double up = net.loss(x, t, target);
    net.params()[p] = keep - h;
    const double down = net.loss(x, t, target);
    net.params()[p] = keep;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - grad[p]) / std::max({std::abs(fd), std::abs(grad[p]), floor}));
  }
  return worst;
}

}  // namespace

ExperimentOutput exp_toy_training(std::uint64_t seed, const toy::TrainConfig& config) {
  toy::TrainConfig cfg = config;
  cfg.seed = seed;
  const Matrix data = standard_normal_rows(static_cast<Index>(cfg.dataset_size), 2, seed);
  auto ck = std::make_shared<toy::Checkpoint>(toy::train(cfg, data, toy::NoiseSchedule::ve(), toy::default_embedding(2)));
  const toy::ModelScoreOracle model(ck, std::make_shared<GaussianMeasure>(GaussianMeasure::standard(2)));

  ExperimentOutput out;
  out.name = "toy";
  BoundCheckResult loss;
  loss.name = "toy_final_loss";
  loss.add("final loss", ck->final_loss, 0.9 * 2.0);
  loss.pass = ck->final_loss < 1.8;
  loss.tolerance = "final epoch loss < 0.9 k with k = 2";
  out.verdicts.push_back(loss);

  BoundCheckResult fi;
  fi.name = "toy_model_fi";
  fi.pass = true;
  out.results.header = {"tau", "fi_model", "fi_model_stderr", "fi_exact"};
  const TauGrid grid = TauGrid::log_sqrt(0.3, 3.0, 9);
  const GaussianMeasure g = GaussianMeasure::standard(2);
  for (double tau : grid.values) {
    const EstimateWithError e = estimate_fi(model, tau, 2000, seed);
    const double exact = gaussian_fi_exact(g, tau);
    fi.add("tau=" + report::format_double(tau), e.mean, exact);
    out.results.rows.push_back({tau, e.mean, e.std_error, exact});
    if (!(std::abs(e.mean - exact) <= 0.15 * exact)) fi.pass = false;
  }
  fi.tolerance = "model FI within 15% of 2 / (1 + tau) for sqrt(tau) in [0.3, 3]";
  out.verdicts.push_back(fi);

  BoundCheckResult gc;
  gc.name = "toy_gradient_check";
  const double err = gradient_check_error(seed, 1e-4);
  gc.add("max relative error", err, 1e-5);
  gc.pass = err < 1e-5;
  gc.tolerance = "backprop vs central differences, max relative error < 1e-5";
  out.verdicts.push_back(gc);

  Figure fig{"loss.svg", {}, {"Training loss per epoch", "epoch", "loss"}};
  report::Series s{"loss", {}, {}};
  for (std::size_t i = 0; i < ck->epoch_losses.size(); ++i) {
    s.x.push_back(static_cast<double>(i + 1));
    s.y.push_back(ck->epoch_losses[i]);
  }
  fig.options.x_scale = report::AxisScale::kLinear;
  fig.series.push_back(std::move(s));
  out.figures.push_back(std::move(fig));
  out.details["train_config"] = cfg.to_json();
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"activation", "linear_delta", "dimension", "cylinder",
                                                 "theory",     "spectra",      "toy"};
  return names;
}

ExperimentOutput run_named_experiment(const std::string& name, std::uint64_t seed, const ParamMap& params) {
  auto get = [&](const char* key) -> const std::string* {
    auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };
  if (name == "activation") {
    check_keys(name, params, {"encoders", "atoms", "curve_atoms", "n", "m_probes", "gap_tau", "gap_samples", "source"});
    ActivationParams p;
    p.seed = seed;
    p.train.seed = seed;
    if (auto v = get("encoders")) {
      p.encoders.clear();
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ';')) p.encoders.push_back(item);
    }
    if (auto v = get("atoms")) p.atoms = parse_count("atoms", *v);
    if (auto v = get("curve_atoms")) p.curve_atoms = parse_count("curve_atoms", *v);
    if (auto v = get("n")) p.sweep.n = parse_count("n", *v);
    if (auto v = get("m_probes")) p.sweep.m_probes = parse_count("m_probes", *v);
    if (auto v = get("gap_tau")) p.gap_tau = parse_one("gap_tau", *v);
    if (auto v = get("gap_samples")) p.gap_samples = parse_count("gap_samples", *v);
    if (auto v = get("source")) p.source = parse_score_source(*v);
    return run_activation(p);
  }
  if (name == "linear_delta") {
    check_keys(name, params, {"deltas", "taus", "check_tau", "mc_samples", "m_probes", "trained"});
    LinearDeltaParams p;
    p.seed = seed;
    p.train.seed = seed;
    if (auto v = get("deltas")) p.deltas = parse_list("deltas", *v);
    if (auto v = get("taus")) p.taus = parse_list("taus", *v);
    if (auto v = get("check_tau")) p.check_tau = parse_one("check_tau", *v);
    if (auto v = get("mc_samples")) p.mc_samples = parse_count("mc_samples", *v);
    if (auto v = get("m_probes")) p.m_probes = parse_count("m_probes", *v);
    if (auto v = get("trained")) p.trained = parse_one("trained", *v) != 0.0;
    return exp_linear_delta(p);
  }
  if (name == "dimension") {
    check_keys(name, params, {"D", "m", "ds", "taus", "check_tau"});
    DimensionParams p;
    if (auto v = get("D")) p.big_d = static_cast<Index>(parse_count("D", *v));
    if (auto v = get("m")) p.m = static_cast<Index>(parse_count("m", *v));
    if (auto v = get("ds")) {
      p.ds.clear();
      for (double d : parse_list("ds", *v)) p.ds.push_back(static_cast<Index>(d));
    }
    if (auto v = get("taus")) p.taus = parse_list("taus", *v);
    if (auto v = get("check_tau")) p.check_tau = parse_one("check_tau", *v);
    return exp_dimension(p);
  }
  if (name == "cylinder") {
    check_keys(name, params, {"eps", "taus", "check_tau", "atoms", "n", "m_probes", "residual_samples", "small_eps"});
    CylinderParams p;
    p.seed = seed;
    if (auto v = get("eps")) p.eps = parse_list("eps", *v);
    if (auto v = get("taus")) p.taus = parse_list("taus", *v);
    if (auto v = get("check_tau")) p.check_tau = parse_one("check_tau", *v);
    if (auto v = get("atoms")) p.atoms = parse_count("atoms", *v);
    if (auto v = get("n")) p.n = parse_count("n", *v);
    if (auto v = get("m_probes")) p.m_probes = parse_count("m_probes", *v);
    if (auto v = get("residual_samples")) p.residual_samples = parse_count("residual_samples", *v);
    if (auto v = get("small_eps")) p.small_eps = parse_one("small_eps", *v);
    return exp_cylinder(p);
  }
  if (name == "theory") return run_theory(seed, params);
  if (name == "spectra") return run_spectra(seed, params);
  if (name == "toy") {
    check_keys(name, params, {"epochs", "dataset_size", "batch"});
    toy::TrainConfig cfg;
    if (auto v = get("epochs")) cfg.epochs = parse_count("epochs", *v);
    if (auto v = get("dataset_size")) cfg.dataset_size = parse_count("dataset_size", *v);
    if (auto v = get("batch")) cfg.batch = parse_count("batch", *v);
    cfg.validate();
    return exp_toy_training(seed, cfg);
  }
  std::string list;
  for (const auto& s : experiment_names()) list += (list.empty() ? "" : ", ") + s;
  fail_validation("unknown experiment '" + name + "' (valid: " + list + ")");
}

VerifySummary verify_all(const VerifyOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(opt.out);
  VerifySummary summary;
  std::vector<std::string> files;
  nlohmann::json experiments = nlohmann::json::array();
  for (const auto& name : experiment_names()) {
    if (name == "toy" && !opt.include_training) continue;
    const ExperimentOutput out = run_named_experiment(name, opt.seed);
    for (const auto& f : write_experiment(out, (fs::path(opt.out) / name).string())) files.push_back(name + "/" + f);
    std::size_t failed = 0;
    nlohmann::json failing = nlohmann::json::array();
    for (const auto& v : out.verdicts) {
      if (!v.pass) {
        ++failed;
        failing.push_back(v.name);
      }
    }
    summary.experiments.push_back(name);
    summary.passed.push_back(failed == 0);
    summary.verdicts += out.verdicts.size();
    summary.failed_verdicts += failed;
    experiments.push_back({{"name", name}, {"pass", failed == 0}, {"verdicts", out.verdicts.size()}, {"failed", failing}});
  }
  const nlohmann::json config = {{"seed", opt.seed}, {"include_training", opt.include_training}};
  report::write_json((fs::path(opt.out) / "summary.json").string(),
                     {{"config", config}, {"experiments", experiments}, {"pass", summary.all_pass()},
                      {"verdicts", summary.verdicts}, {"failed_verdicts", summary.failed_verdicts}});
  files.emplace_back("summary.json");
  report::RunManifest m;
  m.command_line = opt.command_line;
  m.config = config;
  m.seed = opt.seed;
  report::write_manifest(opt.out, m, files);
  return summary;
}

}  // namespace diffu::bench
