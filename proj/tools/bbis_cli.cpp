// Command-line front end: compute black-box importance weights from sample
// files, run named experiments with seeded replications, and evaluate
// weighted sample sets against reference draws.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbis/experiments.hpp"
#include "bbis/io.hpp"
#include "bbis/kde.hpp"
#include "bbis/ksd.hpp"
#include "bbis/med.hpp"
#include "bbis/metrics.hpp"
#include "bbis/samplers.hpp"
#include "bbis/targets.hpp"
#include "bbis/util.hpp"

namespace {

using bbis::Index;
using bbis::Matrix;
using bbis::Vector;
using nlohmann::json;

constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;

//! Lifted out so error messages can name the stage that failed.
struct Stage {
  std::string name = "startup";
};

struct TargetFlags {
  std::string target;  // gaussian | mixture | logistic
  Index dim = 2;
  double tau = 0.0;
  std::string centers_file;
  std::string dataset_file;
  double prior_var = 0.1;
};

bbis::TargetBundle make_target(const TargetFlags& flags) {
  if (flags.target == "gaussian") {
    return bbis::gaussian_target(flags.dim, flags.tau);
  }
  if (flags.target == "mixture") {
    if (flags.centers_file.empty()) {
      throw std::invalid_argument("mixture target needs --centers-file");
    }
    return bbis::mixture_target(bbis::read_samples_csv(flags.centers_file).samples);
  }
  if (flags.target == "logistic") {
    if (flags.dataset_file.empty()) {
      throw std::invalid_argument("logistic target needs --dataset");
    }
    const bbis::LogisticData data = bbis::load_logistic_csv(flags.dataset_file);
    return bbis::logistic_target(data.features, data.labels, flags.prior_var);
  }
  throw std::invalid_argument("unknown target: " + flags.target);
}

double timed_seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int run_weights(const std::string& method, const std::string& input,
                const std::string& out_path, const std::string& diag_path,
                const TargetFlags& tflags, bbis::MedConfig med_cfg,
                const bbis::QPConfig& qp_cfg, std::optional<double> kde_h,
                Stage& stage) {
  stage.name = "weights: reading samples";
  const bbis::SamplesFile file = bbis::read_samples_csv(input);
  const Matrix& samples = file.samples;
  const Index n = samples.rows();

  std::optional<bbis::TargetBundle> target;
  if (!tflags.target.empty()) {
    stage.name = "weights: building target";
    target = make_target(tflags);
    if (target->dim != samples.cols()) {
      throw std::invalid_argument("target dimension does not match samples");
    }
  }

  Vector log_gamma;
  if (method == "med" || method == "kde") {
    if (file.log_density) {
      log_gamma = *file.log_density;
    } else if (target) {
      stage.name = "weights: evaluating log density";
      log_gamma.resize(n);
      for (Index i = 0; i < n; ++i) {
        log_gamma[i] = target->log_gamma(samples.row(i).transpose());
      }
    } else {
      throw std::invalid_argument(
          "need a logdensity column or --target for method " + method);
    }
  }

  json diag;
  Vector weights;
  med_cfg.qp = qp_cfg;

  if (method == "med") {
    stage.name = "weights: minimum-energy solve";
    bbis::MedResult result;
    const double wall = timed_seconds(
        [&] { result = bbis::med_weights(samples, log_gamma, med_cfg); });
    weights = result.weights;
    diag["nu"] = std::isfinite(result.diag.nu) ? json(result.diag.nu) : json();
    diag["active_count"] = result.diag.active_count;
    diag["stabilizer"] = result.diag.stabilizer;
    diag["jitter"] = result.diag.jitter_used;
    diag["iterations"] = result.qp.iterations;
    diag["converged"] = result.qp.converged;
    diag["objective"] = result.qp.objective_trace.back();
    diag["wall_clock_seconds"] = wall;
  } else if (method == "ksd") {
    if (!target || !target->has_score()) {
      throw std::invalid_argument("ksd needs a --target with a score");
    }
    stage.name = "weights: stein solve";
    bbis::KsdResult result;
    const double wall = timed_seconds(
        [&] { result = bbis::ksd_weights(samples, target->score, qp_cfg); });
    weights = result.weights;
    diag["bandwidth_median"] = result.bandwidth;
    diag["iterations"] = result.qp.iterations;
    diag["converged"] = result.qp.converged;
    diag["objective"] = result.qp.objective_trace.back();
    diag["wall_clock_seconds"] = wall;
  } else if (method == "kde") {
    stage.name = "weights: kde weights";
    const double h = kde_h ? *kde_h : bbis::rot_bandwidth(samples);
    const double wall = timed_seconds(
        [&] { weights = bbis::kde_weights(samples, log_gamma, h); });
    diag["bandwidth_rot"] = h;
    diag["wall_clock_seconds"] = wall;
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }

  stage.name = "weights: writing output";
  diag["method"] = method;
  diag["n"] = n;
  diag["p"] = samples.cols();
  bbis::write_weights_csv(out_path, weights);
  const std::string sidecar = diag_path.empty() ? out_path + ".diag.json" : diag_path;
  std::ofstream diag_out(sidecar);
  if (!diag_out) throw std::runtime_error("cannot write file: " + sidecar);
  diag_out << diag.dump(2) << '\n';
  return 0;
}

int run_eval(const std::string& weighted_path, const std::string& reference_path,
             bool full, bool as_json, const TargetFlags& tflags, Stage& stage) {
  stage.name = "eval: reading files";
  const bbis::SamplesFile wfile = bbis::read_samples_csv(weighted_path);
  const bbis::SamplesFile rfile = bbis::read_samples_csv(reference_path);
  if (wfile.samples.cols() != rfile.samples.cols()) {
    throw std::invalid_argument("weighted and reference dimensions differ");
  }

  bbis::WeightedSampleSet ws;
  ws.samples = wfile.samples;
  if (wfile.weights) {
    ws.weights = *wfile.weights;
  } else {
    std::cerr << "warning: no weight column, assuming uniform weights\n";
    ws.weights = Vector::Constant(ws.samples.rows(),
                                  1.0 / double(ws.samples.rows()));
  }
  const bbis::ReferenceSet ref{rfile.samples};

  stage.name = "eval: energy distance";
  json out;
  out["energy_distance"] = bbis::energy_distance_simplified(ws, ref);
  if (full) out["energy_distance_full"] = bbis::energy_distance_full(ws, ref);

  if (!tflags.target.empty()) {
    stage.name = "eval: moment errors";
    const bbis::TargetBundle target = make_target(tflags);
    if (!target.moments) {
      throw std::invalid_argument("target has no known moments");
    }
    const bbis::MomentErrors err = bbis::weighted_moment_errors(ws, *target.moments);
    out["moment_err_mean"] = err.mean_sq_err;
    out["moment_err_diag"] = err.diag_sq_err;
    out["moment_err_sin"] = err.sin_sq_err;
  }

  if (as_json) {
    std::cout << out.dump(2) << '\n';
  } else {
    for (const auto& [key, value] : out.items()) {
      std::cout << key << " = " << value.dump() << '\n';
    }
  }
  return 0;
}

int run_experiment_cmd(bbis::ExperimentConfig cfg, const std::string& config_file,
                       const std::string& out_path, const std::string& summary_path,
                       Stage& stage) {
  if (!config_file.empty()) {
    stage.name = "experiment: reading config";
    std::ifstream in(config_file);
    if (!in) throw std::runtime_error("cannot open config file: " + config_file);
    json j;
    in >> j;
    bbis::apply_json(cfg, j);
  }

  if (cfg.experiment == "calibration-discrete") {
    stage.name = "experiment: calibration-discrete";
    const bbis::CalibrationReport report = bbis::run_calibration_experiment(cfg);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write file: " + out_path);
      out << "method,rho,probability\n";
      for (int k = 0; k < 4; ++k) {
        out << "is," << k << ',' << bbis::format_double(report.p_is[k]) << '\n';
      }
      for (int k = 0; k < 4; ++k) {
        out << "gibbs," << k << ',' << bbis::format_double(report.p_gibbs[k]) << '\n';
      }
      for (int k = 0; k < 4; ++k) {
        out << "med," << k << ',' << bbis::format_double(report.p_med[k]) << '\n';
      }
    }
    const std::string summary = report.summary.dump(2);
    if (!summary_path.empty()) {
      std::ofstream out(summary_path);
      out << summary << '\n';
    } else {
      std::cout << summary << '\n';
    }
    return 0;
  }

  stage.name = "experiment: " + cfg.experiment;
  std::ofstream rows_out;
  if (!out_path.empty()) {
    rows_out.open(out_path);
    if (!rows_out) throw std::runtime_error("cannot write file: " + out_path);
    rows_out << "experiment,method,replicate,seed,energy_distance,"
                "energy_distance_full,moment_err_mean,moment_err_diag,"
                "moment_err_sin,wall_clock_seconds,solver_iterations\n";
    rows_out.flush();
  }
  auto flush_row = [&](const bbis::ResultRecord& r) {
    if (!rows_out.is_open()) return;
    rows_out << r.experiment << ',' << r.method << ',' << r.replicate << ','
             << r.seed << ',' << bbis::format_double(r.energy_distance) << ',';
    if (r.energy_distance_full) {
      rows_out << bbis::format_double(*r.energy_distance_full);
    }
    rows_out << ',';
    if (r.moments) {
      rows_out << bbis::format_double(r.moments->mean_sq_err) << ','
               << bbis::format_double(r.moments->diag_sq_err) << ','
               << bbis::format_double(r.moments->sin_sq_err);
    } else {
      rows_out << ",,";
    }
    rows_out << ',' << bbis::format_double(r.wall_clock_seconds) << ','
             << r.solver_iterations << '\n';
    rows_out.flush();  // partial results survive an abort
  };

  const bbis::ExperimentOutput output = bbis::run_experiment(cfg, flush_row);
  const std::string summary = output.summary.dump(2);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    if (!out) throw std::runtime_error("cannot write file: " + summary_path);
    out << summary << '\n';
  } else {
    std::cout << summary << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box importance weights and evaluation experiments"};
  app.require_subcommand(1);

  std::uint64_t seed = 20240817;
  std::string out_path;
  int threads = 0;
  app.add_option("--seed", seed, "Base RNG seed")->capture_default_str();
  app.add_option("--out", out_path, "Output file path");
  app.add_option("--threads", threads,
                 "Worker threads (default: BBIS_THREADS or hardware)");

  // --- weights ---
  auto* weights_cmd =
      app.add_subcommand("weights", "Compute importance weights for a samples CSV");
  std::string method = "med";
  std::string input_file;
  std::string diag_path;
  TargetFlags tflags;
  bbis::MedConfig med_cfg;
  bbis::QPConfig qp_cfg;
  std::optional<double> kde_h;
  std::string step_rule = "fixed-from-spectral-bound";
  weights_cmd->add_option("--method", method, "med | ksd | kde")->required();
  weights_cmd->add_option("--input", input_file, "Samples CSV")->required();
  weights_cmd->add_option("--diagnostics", diag_path, "Diagnostics JSON path");
  weights_cmd->add_option("--target", tflags.target, "gaussian | mixture | logistic");
  weights_cmd->add_option("--dim", tflags.dim, "Target dimension (gaussian)");
  weights_cmd->add_option("--tau", tflags.tau, "Gaussian correlation parameter");
  weights_cmd->add_option("--centers-file", tflags.centers_file, "Mixture centers CSV");
  weights_cmd->add_option("--dataset", tflags.dataset_file, "Logistic dataset CSV");
  weights_cmd->add_option("--prior-var", tflags.prior_var, "Logistic prior variance");
  weights_cmd->add_option("--k", med_cfg.k, "Energy exponent k");
  weights_cmd->add_option("--delta", med_cfg.delta, "Distance offset delta");
  weights_cmd->add_flag("!--no-filter", med_cfg.filter_enabled,
                        "Disable the low-density filter");
  weights_cmd->add_option("--jitter", med_cfg.jitter, "Covariance jitter");
  weights_cmd->add_option("--max-iters", qp_cfg.max_iters, "QP iteration cap");
  weights_cmd->add_option("--tol", qp_cfg.tol, "QP relative decrease tolerance");
  weights_cmd->add_option("--step-rule", step_rule,
                          "fixed-from-spectral-bound | backtracking");
  weights_cmd->add_option("--bandwidth", kde_h, "KDE bandwidth override");

  // --- experiment ---
  auto* exp_cmd = app.add_subcommand("experiment", "Run a named experiment");
  bbis::ExperimentConfig exp_cfg;
  std::string config_file;
  std::string summary_path;
  std::string methods_csv;
  exp_cmd->add_option("--name", exp_cfg.experiment,
                      "gaussian-n | gaussian-tau | gaussian-p | gaussian-mc | "
                      "mixture-2d | mixture-hd | logistic | calibration-discrete")
      ->required();
  exp_cmd->add_option("--methods", methods_csv,
                      "Comma-separated subset of med,ksd,kde,baseline-mcmc,baseline-mc");
  exp_cmd->add_option("--n", exp_cfg.n, "Samples per replicate");
  exp_cmd->add_option("--p", exp_cfg.p, "Dimension");
  exp_cmd->add_option("--tau", exp_cfg.tau, "Gaussian correlation parameter");
  exp_cmd->add_option("--mixture-k", exp_cfg.mixture_k, "Mixture components");
  exp_cmd->add_option("--reps", exp_cfg.reps, "Replicates");
  exp_cmd->add_option("--ref-size", exp_cfg.ref_size, "Reference sample count");
  exp_cmd->add_flag("--full", exp_cfg.eval_full, "Also report the full energy distance");
  exp_cmd->add_option("--k", exp_cfg.med.k, "Energy exponent k");
  exp_cmd->add_option("--config", config_file, "JSON config (overrides flags)");
  exp_cmd->add_option("--summary", summary_path, "Summary JSON path (default stdout)");

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a weighted CSV against a reference");
  std::string weighted_file;
  std::string reference_file;
  bool eval_full = false;
  bool eval_json = false;
  eval_cmd->add_option("--weighted", weighted_file, "Weighted samples CSV")->required();
  eval_cmd->add_option("--reference", reference_file, "Reference samples CSV")->required();
  eval_cmd->add_flag("--full", eval_full, "Also print the full energy distance");
  eval_cmd->add_flag("--json", eval_json, "Print metrics as JSON");
  eval_cmd->add_option("--target", tflags.target, "Target with known moments");
  eval_cmd->add_option("--dim", tflags.dim, "Target dimension (gaussian)");
  eval_cmd->add_option("--tau", tflags.tau, "Gaussian correlation parameter");
  eval_cmd->add_option("--centers-file", tflags.centers_file, "Mixture centers CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitParse;
  }

  if (threads > 0) bbis::set_num_threads(threads);

  Stage stage;
  try {
    if (*weights_cmd) {
      if (step_rule == "backtracking") {
        qp_cfg.step_rule = bbis::StepRule::kBacktracking;
      } else if (step_rule != "fixed-from-spectral-bound") {
        throw CLI::ValidationError("--step-rule", "unknown step rule");
      }
      if (out_path.empty()) out_path = "weights.csv";
      return run_weights(method, input_file, out_path, diag_path, tflags,
                         med_cfg, qp_cfg, kde_h, stage);
    }
    if (*exp_cmd) {
      exp_cfg.seed = seed;
      exp_cfg.threads = threads;
      if (!methods_csv.empty()) {
        exp_cfg.methods.clear();
        std::stringstream ss(methods_csv);
        std::string token;
        while (std::getline(ss, token, ',')) exp_cfg.methods.push_back(token);
      }
      return run_experiment_cmd(exp_cfg, config_file, out_path, summary_path, stage);
    }
    if (*eval_cmd) {
      return run_eval(weighted_file, reference_file, eval_full, eval_json,
                      tflags, stage);
    }
  } catch (const bbis::ParseError& e) {
    std::cerr << "error [" << stage.name << "]: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error [" << stage.name << "]: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage.name << "]: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
