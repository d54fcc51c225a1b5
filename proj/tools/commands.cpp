#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include "diffu/bench/verify_all.hpp"
#include "diffu/common/parallel.hpp"
#include "diffu/encoders/geometry.hpp"
#include "diffu/estimators/curve.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/report/json_io.hpp"
#include "diffu/report/manifest.hpp"
#include "diffu/report/svg.hpp"
#include "diffu/spectra/spectrum.hpp"
#include "diffu/toy/checkpoint.hpp"
#include "diffu/toy/model_oracle.hpp"

namespace fs = std::filesystem;

namespace diffu::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void finish_outputs(const std::string& dir, const std::vector<std::string>& files, const nlohmann::json& config,
                    std::uint64_t seed, const std::string& command_line, Clock::time_point t0) {
  report::RunManifest m;
  m.command_line = command_line;
  m.config = config;
  m.seed = seed;
  m.wall_time_seconds = seconds_since(t0);
  report::write_manifest(dir, m, files);
}

report::ExperimentSpec resolve(const EstimateArgs& a) {
  report::ExperimentSpec s = a.config_path.empty() ? report::resolve_config({}, a.flags)
                                                   : report::load_config(a.config_path, a.flags);
  if (s.threads > 0) set_thread_count(s.threads);
  return s;
}

std::shared_ptr<const ScoreOracle> apply_encoder(std::shared_ptr<const ScoreOracle> base, const std::string& spec) {
  const Encoder e = Encoder::parse(spec, base->dim());
  if (std::holds_alternative<encoder_detail::Identity>(e.payload())) return base;
  if (const auto* emp = dynamic_cast<const EmpiricalMeasure*>(base.get())) {
    return std::make_shared<EmpiricalMeasure>(pushforward(e, *emp));
  }
  if (e.is_linear()) {
    const Matrix j = e.jacobian(Vector::Zero(base->dim())).matrix;
    if (const auto* g = dynamic_cast<const GaussianMeasure*>(base.get())) {
      return std::make_shared<GaussianMeasure>(g->affine(j, Vector::Zero(j.rows())));
    }
    if (const auto* s = dynamic_cast<const SubspaceGaussian*>(base.get())) {
      return std::make_shared<GaussianMeasure>(s->as_ambient().affine(j, Vector::Zero(j.rows())));
    }
  }
  fail_validation("encoder '" + spec + "' on measure '" + base->id() +
                  "' needs an atomic measure (builtin:atoms:<N> or csv:<path>)");
}

std::shared_ptr<const ScoreOracle> build_oracle(const report::ExperimentSpec& s) {
  auto measure = apply_encoder(make_measure(s.measure, s.seed), s.encoder);
  if (s.score_source == "trained_model") {
    require(!s.checkpoint.empty(), "score_source=trained_model needs checkpoint=<path>");
    auto ck = std::make_shared<toy::Checkpoint>(toy::load_checkpoint(s.checkpoint));
    require(ck->net.data_dim() == measure->dim(), "checkpoint dimension " + std::to_string(ck->net.data_dim()) +
                                                      " does not match the measure dimension " +
                                                      std::to_string(measure->dim()));
    return std::make_shared<toy::ModelScoreOracle>(std::move(ck), std::move(measure));
  }
  return measure;
}

SweepOptions sweep_options(const report::ExperimentSpec& s) {
  SweepOptions o;
  o.n = s.n;
  o.m_probes = s.m_probes;
  o.method = parse_fir_method(s.fir_method);
  o.probes = parse_probe(s.probe);
  o.fd_step = s.fd_step;
  return o;
}

int run_pointwise(const EstimateArgs& a, const std::string& command_line, bool with_fir) {
  const auto t0 = Clock::now();
  const report::ExperimentSpec s = resolve(a);
  const auto oracle = build_oracle(s);
  const TauGrid grid = s.grid();
  const SweepOptions opt = sweep_options(s);
  report::CsvTable table;
  table.header = with_fir ? std::vector<std::string>{"tau", "fir_mean", "fir_stderr", "fir_clustered_stderr"}
                          : std::vector<std::string>{"tau", "fi_mean", "fi_stderr"};
  for (double tau : grid.values) {
    if (with_fir) {
      const EstimateWithError r = opt.method == FirMethod::kJvp
                                      ? estimate_fir_jvp(*oracle, tau, s.n, s.m_probes, s.seed, opt.probes)
                                      : estimate_fir_fd(*oracle, tau, s.n, s.m_probes, opt.fd_step, s.seed, opt.probes);
      table.rows.push_back({tau, r.mean, r.std_error, r.clustered_std_error});
      std::printf("fir tau=%g mean=%.6g stderr=%.3g (n=%zu, probes=%zu, seed=%llu)\n", tau, r.mean,
                  r.clustered_std_error, s.n, s.m_probes, static_cast<unsigned long long>(s.seed));
    } else {
      const EstimateWithError r = estimate_fi(*oracle, tau, s.n, s.seed);
      table.rows.push_back({tau, r.mean, r.std_error});
      std::printf("fi tau=%g mean=%.6g stderr=%.3g (n=%zu, seed=%llu)\n", tau, r.mean, r.std_error, s.n,
                  static_cast<unsigned long long>(s.seed));
    }
  }
  if (a.write_outputs) {
    fs::create_directories(s.out);
    const std::string file = with_fir ? "fir.csv" : "fi.csv";
    report::write_csv((fs::path(s.out) / file).string(), table);
    finish_outputs(s.out, {file}, s.to_json(), s.seed, command_line, t0);
  }
  return kOk;
}

report::Series curve_series(const DiagnosticCurve& c, bool fir) {
  report::Series s{fir ? "FIR" : "FI", c.grid.values, {}};
  for (std::size_t i = 0; i < c.size(); ++i) s.y.push_back(fir ? c.fir[i].mean : c.fi[i].mean);
  return s;
}

}  // namespace

std::string default_out_dir() {
  const char* env = std::getenv("DIFFU_OUT_DIR");
  return (env && *env) ? env : "out";
}

int cmd_fi(const EstimateArgs& a, const std::string& command_line) { return run_pointwise(a, command_line, false); }
int cmd_fir(const EstimateArgs& a, const std::string& command_line) { return run_pointwise(a, command_line, true); }

int cmd_sweep(const EstimateArgs& a, const std::string& command_line) {
  const auto t0 = Clock::now();
  const report::ExperimentSpec s = resolve(a);
  const auto oracle = build_oracle(s);
  const DiagnosticCurve c = diagnostic_sweep(*oracle, s.grid(), sweep_options(s), s.seed);
  fs::create_directories(s.out);
  const fs::path dir(s.out);
  write_curve_csv((dir / "curve.csv").string(), c);
  report::write_json((dir / "curve.json").string(), curve_to_json(c));
  report::write_json((dir / "config.json").string(), s.to_json());
  report::ChartOptions fi_opt{"Fisher information", "tau", "FI"};
  report::write_svg((dir / "fi.svg").string(), {curve_series(c, false)}, fi_opt);
  report::ChartOptions fir_opt{"Fisher information rate", "tau", "FIR"};
  report::write_svg((dir / "fir.svg").string(), {curve_series(c, true)}, fir_opt);
  const std::vector<std::string> files = {"config.json", "curve.csv", "curve.json", "fi.svg", "fir.svg"};
  finish_outputs(s.out, files, s.to_json(), s.seed, command_line, t0);
  std::size_t flagged = 0;
  for (auto f : c.flags) flagged += f != kFlagNone;
  std::printf("sweep %s: %zu tau points, %zu flagged, wrote %s\n", oracle->id().c_str(), c.size(), flagged,
              s.out.c_str());
  return kOk;
}

int cmd_deviation(const DeviationArgs& a, const std::string& command_line) {
  const auto t0 = Clock::now();
  require(a.big_d >= 1 && a.d >= 1 && a.m >= 1, "--D, --d and --m must be positive");
  const DiagnosticCurve pixel = read_curve_csv(a.pixel);
  const DiagnosticCurve latent = read_curve_csv(a.latent);
  require_same_grid(pixel.grid, latent.grid);
  const report::CsvTable t = deviation_table(pixel, latent, a.big_d, a.d, a.m);
  const std::string out = a.out.empty() ? default_out_dir() : a.out;
  fs::create_directories(out);
  report::write_csv((fs::path(out) / "deviation.csv").string(), t);
  const std::size_t col = t.header.size() - 1;
  report::Series s{t.header[col], {}, {}};
  for (const auto& r : t.rows) {
    s.x.push_back(r[0]);
    s.y.push_back(r[col]);
  }
  report::write_svg((fs::path(out) / "deviation.svg").string(), {s}, {"FIR deviation", "tau", t.header[col]});
  const nlohmann::json cfg = {{"pixel", a.pixel}, {"latent", a.latent}, {"D", a.big_d}, {"d", a.d}, {"m", a.m}};
  finish_outputs(out, {"deviation.csv", "deviation.svg"}, cfg, 0, command_line, t0);
  double worst = 0.0;
  for (const auto& r : t.rows) worst = std::max(worst, r[col]);
  std::printf("deviation: %zu tau points, max %s %.6g, wrote %s\n", t.rows.size(), t.header[col].c_str(), worst,
              out.c_str());
  return kOk;
}

int cmd_train(const TrainArgs& a, const std::string& command_line) {
  const auto t0 = Clock::now();
  toy::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.dataset_size = a.dataset_size;
  cfg.batch = a.batch;
  cfg.optimizer.lr = a.lr;
  cfg.seed = a.seed;
  cfg.validate();
  const auto measure = make_measure(a.data, a.seed);
  Matrix data;
  if (const auto* emp = dynamic_cast<const EmpiricalMeasure*>(measure.get())) {
    data = emp->samples();
  } else {
    data = measure->sample(0.0, static_cast<Index>(cfg.dataset_size), a.seed);
  }
  const toy::NoiseSchedule schedule =
      a.schedule == "ddpm" ? toy::NoiseSchedule::ddpm(100, 1e-4, a.beta_end) : toy::NoiseSchedule::parse(a.schedule);
  const std::size_t every = std::max<std::size_t>(1, cfg.epochs / 20);
  const toy::Checkpoint ck = toy::train(cfg, data, schedule, toy::default_embedding(data.cols()),
                                        [&](std::size_t epoch, double loss) {
                                          if (!a.quiet && (epoch % every == 0 || epoch == cfg.epochs)) {
                                            std::fprintf(stderr, "epoch %zu/%zu loss %.5f\n", epoch, cfg.epochs, loss);
                                          }
                                        });
  const std::string out = a.out.empty() ? default_out_dir() : a.out;
  fs::create_directories(out);
  const bool json = a.format == "json";
  require(json || a.format == "binary", "--format must be binary or json");
  const std::string ck_name = json ? "checkpoint.json" : "checkpoint.bin";
  toy::save_checkpoint(ck, (fs::path(out) / ck_name).string(),
                       json ? toy::CheckpointFormat::kJson : toy::CheckpointFormat::kBinary);
  report::CsvTable losses;
  losses.header = {"epoch", "loss"};
  for (std::size_t i = 0; i < ck.epoch_losses.size(); ++i) losses.rows.push_back({double(i + 1), ck.epoch_losses[i]});
  report::write_csv((fs::path(out) / "losses.csv").string(), losses);
  const nlohmann::json cfg_json = {{"data", a.data}, {"schedule", schedule.to_json()}, {"train", cfg.to_json()}};
  finish_outputs(out, {ck_name, "losses.csv"}, cfg_json, a.seed, command_line, t0);
  const double k = static_cast<double>(data.cols());
  std::printf("train-toy: final loss %.5f (%.3f k) after %zu epochs, wrote %s\n", ck.final_loss, ck.final_loss / k,
              cfg.epochs, (fs::path(out) / ck_name).string().c_str());
  return kOk;
}

int cmd_bench_run(const BenchArgs& a, const std::string& command_line) {
  const auto t0 = Clock::now();
  bench::ParamMap params;
  for (const auto& kv : a.params) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos && eq > 0, "--param expects key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const bench::ExperimentOutput out = bench::run_named_experiment(a.experiment, a.seed, params);
  const std::string dir = a.out.empty() ? (fs::path(default_out_dir()) / a.experiment).string() : a.out;
  const auto files = bench::write_experiment(out, dir);
  nlohmann::json cfg = {{"experiment", a.experiment}, {"params", params}};
  finish_outputs(dir, files, cfg, a.seed, command_line, t0);
  std::size_t pass = 0;
  for (const auto& v : out.verdicts) pass += v.pass;
  std::printf("bench %s: %zu/%zu verdicts pass, wrote %s\n", a.experiment.c_str(), pass, out.verdicts.size(),
              dir.c_str());
  for (const auto& v : out.verdicts) {
    if (!v.pass) std::printf("  FAIL %s (%s)\n", v.name.c_str(), v.tolerance.c_str());
  }
  return kOk;
}

int cmd_bench_verify(const BenchArgs& a, const std::string& command_line) {
  bench::VerifyOptions opt;
  opt.seed = a.seed;
  opt.out = a.out.empty() ? (fs::path(default_out_dir()) / "verify").string() : a.out;
  opt.include_training = a.include_training;
  opt.command_line = command_line;
  const bench::VerifySummary s = bench::verify_all(opt);
  std::printf("verify-all: %zu/%zu verdicts pass across %zu experiments, wrote %s\n", s.verdicts - s.failed_verdicts,
              s.verdicts, s.experiments.size(), opt.out.c_str());
  for (std::size_t i = 0; i < s.experiments.size(); ++i) {
    if (!s.passed[i]) std::printf("  FAIL %s\n", s.experiments[i].c_str());
  }
  return s.all_pass() ? kOk : kRuntimeError;
}

int cmd_spectra(const SpectraArgs& a, const std::string& command_line) {
  const auto t0 = Clock::now();
  const report::CsvTable in = report::read_csv(a.input, a.header);
  require(!in.rows.empty(), "no samples in " + a.input);
  Matrix x(static_cast<Index>(in.rows.size()), static_cast<Index>(in.rows.front().size()));
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = in.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  spectra::SpectrumReport r;
  if (a.mode == "1d") {
    r = spectra::power_spectrum_1d(x, a.normalize, !a.keep_dc);
  } else if (a.mode == "2d") {
    require(a.height >= 2 && a.width >= 2 && a.channels >= 1, "2d mode needs --channels, --height and --width");
    require(a.channels * a.height * a.width == x.cols(), "each row must hold channels*height*width values");
    r = spectra::power_spectrum_2d(x, a.channels, a.height, a.width, a.normalize, !a.keep_dc);
  } else {
    fail_validation("--mode must be 1d or 2d");
  }
  const fs::path out = a.out.empty() ? fs::path(default_out_dir()) / "spectrum.csv" : fs::path(a.out);
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  fs::create_directories(dir);
  report::write_csv(out.string(), r.to_table());
  fs::path svg = out;
  svg.replace_extension(".svg");
  report::Series s{"power", r.frequencies, r.power};
  report::ChartOptions opt{"Power spectrum (" + a.mode + ")", "frequency", "power"};
  opt.x_scale = report::AxisScale::kLinear;
  report::write_svg(svg.string(), {s}, opt);
  const nlohmann::json cfg = {{"input", a.input}, {"mode", a.mode}, {"normalize", a.normalize}, {"exclude_dc", !a.keep_dc}};
  finish_outputs(dir.string(), {out.filename().string(), svg.filename().string()}, cfg, 0, command_line, t0);
  std::printf("spectra %s: %zu samples, %zu bins, total power %.6g, wrote %s\n", a.mode.c_str(), r.samples,
              r.bins.size(), r.total_power, out.string().c_str());
  return kOk;
}

int cmd_bilip(const BilipArgs& a) {
  const auto measure = make_measure(a.measure, a.seed);
  Matrix x;
  if (const auto* emp = dynamic_cast<const EmpiricalMeasure*>(measure.get())) {
    x = emp->samples().topRows(std::min<Index>(emp->samples().rows(), static_cast<Index>(a.samples)));
  } else {
    x = measure->sample(0.0, static_cast<Index>(a.samples), a.seed);
  }
  const Encoder e = Encoder::parse(a.encoder, x.cols());
  const std::size_t budget = a.pairs == 0 ? 200000 : a.pairs;
  const BiLipschitzEstimate b = bilipschitz_estimate(e, x, budget, a.seed);
  std::printf("bilip %s: c=%.6g C=%.6g ratio=%.6g (%zu pairs)\n", e.name().c_str(), b.lower, b.upper, b.ratio,
              b.pairs);
  return kOk;
}

}  // namespace diffu::cli
