// Acceptance checks. Each criterion prints one "[PASS]" or "[FAIL]" line and
// the process exits non-zero when any requested criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <malloc.h>

#include <CLI11.hpp>

#include "diffu/bench/experiments.hpp"
#include "diffu/bench/verify_all.hpp"
#include "diffu/common/parallel.hpp"
#include "diffu/encoders/encoder.hpp"
#include "diffu/encoders/geometry.hpp"
#include "diffu/estimators/curve.hpp"
#include "diffu/estimators/estimators.hpp"
#include "diffu/estimators/finite_difference.hpp"
#include "diffu/measures/empirical.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/report/csv.hpp"
#include "diffu/report/json_io.hpp"

using namespace diffu;
using namespace diffu::bench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Pass iff every listed verdict passed; the detail names the failures.
Outcome verdicts_pass(const ExperimentOutput& out, const std::vector<std::string>& names) {
  Outcome o{true, ""};
  for (const auto& want : names) {
    bool found = false;
    for (const auto& v : out.verdicts) {
      if (v.name != want) continue;
      found = true;
      if (!v.pass) {
        o.pass = false;
        o.detail += " " + v.name + " failed (" + v.tolerance + ")";
        for (std::size_t i = 0; i < v.measured.size(); ++i) {
          o.detail += " [" + v.labels[i] + ": " + fmt(v.measured[i]) + " vs " + fmt(v.reference[i]) + "]";
        }
        if (!std::isnan(v.slope)) o.detail += " slope=" + fmt(v.slope);
        if (!std::isnan(v.r_squared)) o.detail += " r2=" + fmt(v.r_squared);
      }
    }
    if (!found) {
      o.pass = false;
      o.detail += " missing verdict " + want;
    }
  }
  if (o.pass) o.detail = " all of " + std::to_string(names.size()) + " verdicts pass";
  return o;
}

Outcome within_budget(Outcome o, double seconds, double limit) {
  o.detail += "; runtime " + fmt(seconds) + " s (limit " + fmt(limit) + " s)";
  if (seconds >= limit) o.pass = false;
  return o;
}

// 1: MC FI and FIR on N(0, I_2) against k/(1+tau) and k/(1+tau)^2.
Outcome criterion1(const fs::path&) {
  Timer t;
  const auto g = GaussianMeasure::standard(2);
  Outcome o{true, ""};
  for (double tau : {0.1, 1.0, 10.0}) {
    const auto e = estimate_fi_fir(g, tau, 100000, 50, 1);
    const double fi = 2.0 / (1.0 + tau), fir = 2.0 / ((1.0 + tau) * (1.0 + tau));
    // Isotropic Gaussian HVPs are exact and probe-invariant, so the FIR
    // stderr is zero up to rounding; a 1e-12 relative floor absorbs that.
    const bool ok_fi = std::abs(e.fi.mean - fi) <= 3.0 * e.fi.clustered_std_error + 1e-12 * fi;
    const bool ok_fir = std::abs(e.fir.mean - fir) <= 3.0 * e.fir.clustered_std_error + 1e-12 * fir;
    o.pass = o.pass && ok_fi && ok_fir;
    o.detail += " tau=" + fmt(tau) + " fi " + fmt(e.fi.mean) + " vs " + fmt(fi) + " (se " +
                fmt(e.fi.clustered_std_error) + "), fir " + fmt(e.fir.mean) + " vs " + fmt(fir) + " (se " +
                fmt(e.fir.clustered_std_error) + ");";
  }
  return within_budget(o, t.seconds(), 30.0);
}

// 2: normal-direction identity, exact and Monte Carlo.
Outcome criterion2(const fs::path&) {
  Timer t;
  LemmaParams p;
  ExperimentOutput out;
  for (auto& v : check_lemma_normal(p)) out.verdicts.push_back(std::move(v));
  std::vector<std::string> names;
  for (const auto& v : out.verdicts) names.push_back(v.name);
  return within_budget(verdicts_pass(out, names), t.seconds(), 60.0);
}

// 3: FIR as -dFI/dtau, analytically and between MC curves.
Outcome criterion3(const fs::path&) {
  const GaussianMeasure g(Vector::Zero(3), Vector(Vector::LinSpaced(3, 0.1, 2.0)).asDiagonal());
  const TauGrid grid = TauGrid::log(1e-2, 1e2, 200);
  std::vector<double> fi;
  for (double tau : grid.values) fi.push_back(gaussian_fi_exact(g, tau));
  const auto fir = fir_from_fi_curve(grid.values, fi);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = gaussian_fir_exact(g, grid[i]);
    worst = std::max(worst, std::abs(fir[i] - exact) / exact);
  }
  Outcome o{worst <= 1e-4, " analytic max relative error " + fmt(worst) + " (limit 1e-4);"};

  SweepOptions opt;
  opt.n = 20000;
  opt.m_probes = 10;
  const auto c = diagnostic_sweep(g, TauGrid::log_sqrt(0.3, 3.0, 16), opt, 3);
  const auto mc_fir = fir_from_fi_curve(c);
  std::vector<double> se;
  for (const auto& f : c.fi) se.push_back(f.std_error);
  const auto fd_se = derivative_stderr(c.grid.values, se);
  double worst_z = 0.0;
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    const double joint = std::hypot(fd_se[i], c.fir[i].clustered_std_error);
    worst_z = std::max(worst_z, std::abs(mc_fir[i] - c.fir[i].mean) / joint);
  }
  o.pass = o.pass && worst_z <= 3.0;
  o.detail += " MC interior max z " + fmt(worst_z) + " (limit 3)";
  return o;
}

// 4: I-MMSE on a 100-atom mixture and the resistance split against dMMSE/dtau.
Outcome criterion4(const fs::path&) {
  const EmpiricalMeasure e(standard_normal_rows(100, 2, 4));
  Outcome o{true, ""};
  for (double tau : {0.1, 1.0, 10.0}) {
    const auto direct = empirical_mmse(e, tau, 20000, 41);
    const auto est = estimate_fi_fir(e, tau, 20000, 10, 42);
    const double via = mmse_from_fi(tau, 2, est.fi.mean);
    const double se = std::hypot(direct.std_error, tau * tau * est.fi.std_error);
    const double z = std::abs(direct.mean - via) / se;

    // dMMSE/dtau from a five-point log-spaced stencil of MC FI values.
    std::vector<double> taus, mmse, mmse_se;
    for (int j = -2; j <= 2; ++j) {
      const double tj = tau * std::exp(0.05 * j);
      const auto fj = estimate_fi(e, tj, 20000, 42);
      taus.push_back(tj);
      mmse.push_back(mmse_from_fi(tj, 2, fj.mean));
      mmse_se.push_back(tj * tj * fj.std_error);
    }
    const double deriv = derivative_on_grid(taus, mmse)[2];
    const double deriv_se = derivative_stderr(taus, mmse_se)[2];
    const auto r = denoising_resistance(tau, 2, est.fi.mean, est.fir.mean);
    const double r_se = std::hypot(2 * tau * est.fi.std_error, tau * tau * est.fir.clustered_std_error);
    const double zr = std::abs(r.total - deriv) / std::hypot(deriv_se, r_se);
    o.pass = o.pass && z <= 3.0 && zr <= 3.0;
    o.detail += " tau=" + fmt(tau) + " mmse z=" + fmt(z) + " resistance z=" + fmt(zr) + ";";
  }
  return o;
}

Outcome criterion5(const fs::path&) {
  Timer t;
  const auto out = exp_linear_delta(LinearDeltaParams{});
  return within_budget(verdicts_pass(out, {"linear_delta_monotone", "linear_delta_slope"}), t.seconds(), 5.0);
}

Outcome criterion6(const fs::path&) {
  Timer t;
  const auto out = exp_dimension(DimensionParams{});
  return within_budget(verdicts_pass(out, {"dimension_decreasing", "dimension_linear_trend"}), t.seconds(), 5.0);
}

Outcome criterion7(const fs::path&) {
  Timer t;
  const auto out = exp_cylinder(CylinderParams{});
  return within_budget(
      verdicts_pass(out, {"cylinder_taylor_residual", "cylinder_monotone_in_eps", "cylinder_loglog_slope"}),
      t.seconds(), 120.0);
}

// 8: FI sandwich for LinearDiag(0.5), equality for the identity.
Outcome criterion8(const fs::path&) {
  const auto plane = SubspaceGaussian::coordinate(2, 2);
  const TauGrid grid = TauGrid::standard();
  const auto lin = check_fi_bounds(Encoder::linear_diag(0.5), plane, grid);
  const auto id = check_fi_bounds(Encoder::identity(2), plane, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < id.measured.size(); ++i) {
    worst = std::max(worst, std::abs(id.measured[i] - id.reference[i]) / id.reference[i]);
  }
  Outcome o{lin.pass && id.pass && worst <= 1e-12 && !id.measured.empty(), ""};
  o.detail = " linear_diag(0.5) sandwich " + std::string(lin.pass ? "holds" : "violated") +
             " on " + std::to_string(grid.size()) + " taus; identity max relative gap " + fmt(worst);
  return o;
}

Outcome criterion9(const fs::path&) {
  Timer t;
  const auto out = exp_toy_training(0, toy::TrainConfig{});
  return within_budget(verdicts_pass(out, {"toy_final_loss", "toy_model_fi", "toy_gradient_check"}), t.seconds(),
                       600.0);
}

// 10: FI gap ordering with 5e4 exact mixture atoms at tau = 0.1.
Outcome criterion10(const fs::path&) {
  const ActivationParams p;
  const EmpiricalMeasure atoms(standard_normal_rows(static_cast<Index>(p.atoms), 2, p.seed));
  auto gap = [&](const std::string& spec) {
    return activation_fi_gap(atoms, Encoder::parse(spec, 2), 0.1, p.gap_samples, p.seed);
  };
  const auto relu = gap("relu");
  const auto tanh = gap("tanh");
  Outcome o{relu.gap > tanh.gap, ""};
  o.detail = " relu gap " + fmt(relu.gap) + " vs tanh gap " + fmt(tanh.gap) + "; leaky gaps";
  double prev = std::numeric_limits<double>::infinity();
  for (const char* a : {"0.25", "0.5", "0.75", "1"}) {
    const auto g = gap(std::string("leaky_relu:") + a);
    o.pass = o.pass && g.gap < prev;
    prev = g.gap;
    o.detail += " " + std::string(a) + ":" + fmt(g.gap);
  }
  return o;
}

Outcome criterion11(const fs::path&) {
  const Matrix x = standard_normal_rows(5000, 2, 11);
  const auto id = bilipschitz_estimate(Encoder::identity(2), x, 200000, 11);
  const auto lin = bilipschitz_estimate(Encoder::linear_diag(0.5), x, 200000, 11);
  const double lo = std::abs(lin.lower / std::sqrt(0.5) - 1.0);
  const double hi = std::abs(lin.upper / std::sqrt(1.5) - 1.0);
  Outcome o{id.lower == 1.0 && id.upper == 1.0 && id.ratio == 1.0 && lo <= 0.02 && hi <= 0.02, ""};
  o.detail = " identity (" + fmt(id.lower) + "," + fmt(id.upper) + "," + fmt(id.ratio) + "); linear_diag(0.5) c=" +
             fmt(lin.lower) + " (rel err " + fmt(lo) + ") C=" + fmt(lin.upper) + " (rel err " + fmt(hi) + ")";
  return o;
}

Outcome criterion12(const fs::path&) {
  const auto out = run_named_experiment("spectra", 0);
  return verdicts_pass(out, {"white_noise_flat", "parseval", "permutation_contrast"});
}

// Every CSV and JSON file under dir, keyed by relative path. The manifest's
// wall time and command line are dropped before comparing.
std::map<std::string, std::string> comparable_outputs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".json") continue;
    const std::string rel = fs::relative(entry.path(), dir).string();
    if (rel == "manifest.json") {
      auto j = report::read_json(entry.path().string());
      j.erase("wall_time_seconds");
      j.erase("command_line");
      files[rel] = j.dump();
    } else {
      files[rel] = report::read_text_file(entry.path().string());
    }
  }
  return files;
}

Outcome criterion13(const fs::path& work) {
  const std::size_t before = thread_count();
  std::vector<std::map<std::string, std::string>> runs;
  const std::size_t threads[] = {1, 3};
  for (std::size_t r = 0; r < 2; ++r) {
    const fs::path dir = work / ("verify_seed7_run" + std::to_string(r));
    fs::remove_all(dir);
    set_thread_count(threads[r]);
    VerifyOptions opt;
    opt.seed = 7;
    opt.out = dir.string();
    opt.command_line = "bench verify-all --seed 7 --threads " + std::to_string(threads[r]);
    verify_all(opt);
    runs.push_back(comparable_outputs(dir));
  }
  set_thread_count(before);
  Outcome o{!runs[0].empty() && runs[0].size() == runs[1].size(), ""};
  std::size_t differing = 0;
  for (const auto& [path, bytes] : runs[0]) {
    auto it = runs[1].find(path);
    if (it == runs[1].end() || it->second != bytes) {
      ++differing;
      o.detail += " differs: " + path;
    }
  }
  o.pass = o.pass && differing == 0;
  o.detail = " " + std::to_string(runs[0].size()) + " CSV/JSON files compared at 1 and 3 threads, " +
             std::to_string(differing) + " differ" + o.detail;
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome(const fs::path&)>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome(const fs::path&)>>> list = {
      {"Gaussian FI/FIR closed-form agreement", criterion1},
      {"normal-direction FIR identity", criterion2},
      {"FIR equals -dFI/dtau", criterion3},
      {"I-MMSE and resistance split", criterion4},
      {"linear near-isometry deviation grows with delta", criterion5},
      {"zero-padding scaled deviation trend", criterion6},
      {"cylinder wrap curvature scaling", criterion7},
      {"FI sandwich bounds", criterion8},
      {"toy diffusion training", criterion9},
      {"activation FI gap ordering", criterion10},
      {"bi-Lipschitz estimator", criterion11},
      {"spectra and permutation contrast", criterion12},
      {"verify-all reproducibility", criterion13},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);

  CLI::App app{"acceptance checks"};
  std::vector<int> which;
  std::string workdir = "acceptance_out";
  app.add_option("--criterion", which, "criterion number(s), 1-13; all when omitted")->check(CLI::Range(1, 13));
  app.add_option("--workdir", workdir, "scratch directory for written outputs");
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) which.push_back(i);
  }
  fs::create_directories(workdir);

  int failures = 0;
  for (int c : which) {
    const auto& [title, fn] = criteria()[static_cast<std::size_t>(c - 1)];
    Outcome o;
    try {
      o = fn(fs::path(workdir));
    } catch (const std::exception& e) {
      o = {false, std::string(" error: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << c << " (" << title << "):" << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
