// diffu: command-line front end for the Fisher-information diagnostics.
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <malloc.h>

#include <CLI11.hpp>

#include "commands.hpp"
#include "diffu/common/error.hpp"
#include "diffu/common/parallel.hpp"

using namespace diffu;
using namespace diffu::cli;

namespace {

// Flags shared by fi, fir and sweep, each mapped onto a config key.
struct EstimateFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::vector<std::string> sets;
  std::string config;
  std::vector<double> taus;
  CLI::Option* taus_opt = nullptr;

  void attach(CLI::App* app, bool fir) {
    app->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "config override key=value (repeatable)");
    taus_opt = app->add_option("--tau", taus, "explicit tau values (overrides the grid)")->delimiter(',');
    const std::vector<std::pair<const char*, const char*>> common = {
        {"--measure", "measure"}, {"--encoder", "encoder"},          {"--n", "n"},
        {"--seed", "seed"},       {"--score-source", "score_source"}, {"--checkpoint", "checkpoint"},
        {"--out", "out"},         {"--sqrt-tau-min", "sqrt_tau_min"}, {"--sqrt-tau-max", "sqrt_tau_max"},
        {"--grid-points", "grid_points"}, {"--spacing", "spacing"},  {"--budget", "budget"},
        {"--threads", "threads"}};
    for (const auto& [flag, key] : common) options[key] = app->add_option(flag, values[key]);
    if (fir) {
      for (const auto& [flag, key] : std::vector<std::pair<const char*, const char*>>{
               {"--m-probes", "m_probes"}, {"--method", "fir_method"}, {"--probe", "probe"}, {"--fd-step", "fd_step"}}) {
        options[key] = app->add_option(flag, values[key]);
      }
    }
  }

  EstimateArgs resolve(bool always_write) const {
    EstimateArgs a;
    a.config_path = config;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got '" + kv + "'");
      a.flags[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) a.flags[key] = values.at(key);
    }
    if (taus_opt->count() > 0) {
      std::string joined;
      for (double t : taus) joined += (joined.empty() ? "" : ",") + CLI::detail::to_string(t);
      a.flags["taus"] = joined;
    }
    a.write_outputs = always_write || options.at("out")->count() > 0;
    return a;
  }
};

std::string join_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  // Mixture queries allocate and free buffers of a few hundred KB at a high
  // rate; keeping them on the heap instead of fresh mmaps avoids page-fault
  // churn.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  CLI::App app{"Fisher information diagnostics for diffusion latent spaces"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (default: DIFFU_THREADS or hardware concurrency)");

  EstimateFlags fi_flags, fir_flags, sweep_flags;
  auto* fi = app.add_subcommand("fi", "Monte Carlo Fisher information at one or more tau");
  fi_flags.attach(fi, false);
  auto* fir = app.add_subcommand("fir", "Monte Carlo Fisher information rate");
  fir_flags.attach(fir, true);
  auto* sweep = app.add_subcommand("sweep", "FI, FIR, MMSE and resistance over a tau grid");
  sweep_flags.attach(sweep, true);

  DeviationArgs dev;
  auto* deviation = app.add_subcommand("deviation", "FIR deviation between two curve CSVs");
  deviation->add_option("--pixel", dev.pixel, "ambient curve CSV")->required()->check(CLI::ExistingFile);
  deviation->add_option("--latent", dev.latent, "latent curve CSV")->required()->check(CLI::ExistingFile);
  deviation->add_option("--D", dev.big_d, "ambient dimension")->required();
  deviation->add_option("--d", dev.d, "latent dimension")->required();
  deviation->add_option("--m", dev.m, "intrinsic dimension")->required();
  deviation->add_option("--out", dev.out, "output directory");

  TrainArgs tr;
  auto* train = app.add_subcommand("train-toy", "train the toy score network");
  train->add_option("--data", tr.data, "measure spec for the training data");
  train->add_option("--schedule", tr.schedule, "ve or ddpm")->check(CLI::IsMember({"ve", "ddpm"}));
  train->add_option("--beta-end", tr.beta_end, "final DDPM beta");
  train->add_option("--epochs", tr.epochs);
  train->add_option("--dataset-size", tr.dataset_size);
  train->add_option("--batch", tr.batch);
  train->add_option("--lr", tr.lr);
  train->add_option("--seed", tr.seed);
  train->add_option("--format", tr.format, "binary or json checkpoint")->check(CLI::IsMember({"binary", "json"}));
  train->add_option("--out", tr.out, "output directory");
  train->add_flag("--quiet", tr.quiet, "no per-epoch progress");

  BenchArgs br, bv;
  auto* bench = app.add_subcommand("bench", "experiments and bound checks");
  bench->require_subcommand(1);
  auto* run = bench->add_subcommand("run", "run one experiment");
  run->add_option("experiment", br.experiment, "activation, linear_delta, dimension, cylinder, theory, spectra, toy")
      ->required();
  run->add_option("--param", br.params, "parameter override key=value (repeatable)");
  run->add_option("--seed", br.seed);
  run->add_option("--out", br.out, "output directory");
  auto* verify = bench->add_subcommand("verify-all", "run the whole suite; nonzero exit on any failed verdict");
  verify->add_option("--seed", bv.seed);
  verify->add_option("--out", bv.out, "output directory");
  verify->add_flag("--include-training", bv.include_training, "also train the toy model (minutes)");

  SpectraArgs sp;
  auto* spectra = app.add_subcommand("spectra", "power spectrum of a sample CSV");
  spectra->add_option("--input", sp.input, "samples, one per row")->required()->check(CLI::ExistingFile);
  spectra->add_option("--mode", sp.mode, "1d or 2d")->check(CLI::IsMember({"1d", "2d"}));
  spectra->add_option("--out", sp.out, "spectrum CSV path (SVG written next to it)");
  spectra->add_flag("--header", sp.header, "input has a header row");
  spectra->add_flag("--normalize", sp.normalize, "standardize each sample first");
  spectra->add_flag("--keep-dc", sp.keep_dc, "keep the zero-frequency bin");
  spectra->add_option("--channels", sp.channels);
  spectra->add_option("--height", sp.height);
  spectra->add_option("--width", sp.width);

  BilipArgs bl;
  auto* bilip = app.add_subcommand("bilip", "empirical bi-Lipschitz constants of an encoder");
  bilip->add_option("--encoder", bl.encoder);
  bilip->add_option("--measure", bl.measure);
  bilip->add_option("--samples", bl.samples);
  bilip->add_option("--pairs", bl.pairs, "pair budget (0: 200000)");
  bilip->add_option("--seed", bl.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) {
      failing = sub;
      for (auto* inner : sub->get_subcommands()) failing = inner;
    }
    std::cerr << failing->help();
    return kUsage;
  }

  const std::string command_line = join_argv(argc, argv);
  try {
    if (threads > 0) set_thread_count(threads);
    if (fi->parsed()) return cmd_fi(fi_flags.resolve(false), command_line);
    if (fir->parsed()) return cmd_fir(fir_flags.resolve(false), command_line);
    if (sweep->parsed()) return cmd_sweep(sweep_flags.resolve(true), command_line);
    if (deviation->parsed()) return cmd_deviation(dev, command_line);
    if (train->parsed()) return cmd_train(tr, command_line);
    if (run->parsed()) return cmd_bench_run(br, command_line);
    if (verify->parsed()) return cmd_bench_verify(bv, command_line);
    if (spectra->parsed()) return cmd_spectra(sp, command_line);
    if (bilip->parsed()) return cmd_bilip(bl);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsage;
}
