#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbis/med.hpp"
#include "bbis/metrics.hpp"
#include "bbis/types.hpp"

namespace bbis {

//! One named experiment run: which target/stream family, which weighting
//! methods, and the replication/evaluation knobs. Field names match the JSON
//! config schema accepted by the CLI.
struct ExperimentConfig {
  std::string experiment = "gaussian-n";
  std::vector<std::string> methods = {"med", "baseline-mcmc"};
  Index n = 256;          // chain length / sample count per replicate
  Index p = 2;
  double tau = 0.0;
  Index mixture_k = 20;
  int reps = 30;
  std::uint64_t seed = 20240817;
  Index ref_size = 10000;
  int threads = 0;        // 0 = library default
  bool eval_full = false;
  bool eval_moments = true;
  MedConfig med;
  QPConfig qp;            // solver settings shared by med and ksd

  // logistic experiment
  Index logistic_obs = 50;
  Index logistic_features = 4;
  double prior_var = 0.1;
  Index logistic_ref_chain = 20000;

  // calibration-discrete experiment
  Index is_samples = 40000;
  Index gibbs_steps = 4000;       // recorded sub-steps (2 per sweep)
  Index chain_per_level = 250;
  double calibration_ram_scale = 0.1;
};

struct ResultRecord {
  std::string experiment;
  std::string method;
  int replicate = 0;
  std::uint64_t seed = 0;
  double energy_distance = 0.0;  // simplified metric, un-normalized
  std::optional<double> energy_distance_full;
  std::optional<MomentErrors> moments;
  double wall_clock_seconds = 0.0;
  int solver_iterations = 0;
};

struct ExperimentOutput {
  std::vector<ResultRecord> rows;  // ordered by replicate, then method order
  nlohmann::json summary;
};

//! Runs every replicate of a standard experiment (all kinds except
//! calibration-discrete). All methods within a replicate share the same
//! sample stream and reference set, so comparisons are paired. `on_row`,
//! when given, is invoked in output order as replicates complete.
ExperimentOutput run_experiment(
    const ExperimentConfig& cfg,
    const std::function<void(const ResultRecord&)>& on_row = nullptr);

//! The mixed discrete/continuous end-to-end run: P(rho = k) for k = 0..3
//! under the importance-sampling ground truth, the Gibbs baseline, and
//! pooled per-level chains reweighted by minimum-energy weights.
struct CalibrationReport {
  Eigen::Vector4d p_is;
  Eigen::Vector4d p_gibbs;
  Eigen::Vector4d p_med;
  nlohmann::json summary;
};

CalibrationReport run_calibration_experiment(const ExperimentConfig& cfg);

//! JSON round-trip for configs; `apply_json` overrides only the keys present.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

void write_results_csv(const std::string& path,
                       const std::vector<ResultRecord>& rows);

}  // namespace bbis
