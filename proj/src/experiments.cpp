#include "bbis/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bbis/io.hpp"
#include "bbis/kde.hpp"
#include "bbis/ksd.hpp"
#include "bbis/samplers.hpp"
#include "bbis/util.hpp"

namespace bbis {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_gaussian_kind(const std::string& e) {
  return e == "gaussian-n" || e == "gaussian-tau" || e == "gaussian-p" ||
         e == "gaussian-mc";
}

bool is_mixture_kind(const std::string& e) {
  return e == "mixture-2d" || e == "mixture-hd";
}

bool normalizes_by_dimension(const std::string& e) {
  return e == "gaussian-p" || e == "mixture-hd";
}

void validate(const ExperimentConfig& cfg, bool target_has_score) {
  if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("methods must be nonempty");
  for (const auto& m : cfg.methods) {
    if (m != "med" && m != "ksd" && m != "kde" && m != "baseline-mcmc" &&
        m != "baseline-mc") {
      throw std::invalid_argument("unknown method: " + m);
    }
    if (m == "ksd" && !target_has_score) {
      throw std::invalid_argument("ksd requires a target with a score");
    }
    if (m == "baseline-mc" && cfg.experiment != "gaussian-mc") {
      throw std::invalid_argument("baseline-mc is only defined for gaussian-mc");
    }
  }
}

struct SharedSetup {
  TargetBundle target;
  std::optional<ReferenceSet> fixed_ref;  // logistic: one long-chain reference
};

SharedSetup build_setup(const ExperimentConfig& cfg) {
  SharedSetup s;
  if (is_gaussian_kind(cfg.experiment)) {
    s.target = gaussian_target(cfg.p, cfg.tau);
  } else if (is_mixture_kind(cfg.experiment)) {
    // One fixed mixture target per experiment; replicates share it.
    Rng rng(derive_seed(cfg.seed, 0xCE17ULL));
    const double spread = cfg.experiment == "mixture-2d" ? 3.0 : 1.0;
    const Index dim = cfg.experiment == "mixture-2d" ? 2 : cfg.p;
    const Matrix centers = spread * rng.normal_matrix(cfg.mixture_k, dim);
    s.target = mixture_target(centers);
  } else if (cfg.experiment == "logistic") {
    const LogisticData data = make_synthetic_logistic(
        cfg.logistic_obs, cfg.logistic_features, derive_seed(cfg.seed, 0xDA7AULL));
    s.target = logistic_target(data.features, data.labels, cfg.prior_var);
    // No exact sampler: the reference is the second half of one long chain,
    // thinned down to at most ref_size rows.
    const ChainRecord ref_chain = ram_chain(
        s.target, cfg.logistic_ref_chain, derive_seed(cfg.seed, 0x5EFULL),
        {.init = Vector::Zero(s.target.dim)});
    const Index half = ref_chain.size() / 2;
    const Index keep = std::min<Index>(cfg.ref_size, half);
    const Index stride = std::max<Index>(1, half / keep);
    Matrix ref(keep, s.target.dim);
    for (Index i = 0; i < keep; ++i) {
      ref.row(i) = ref_chain.accepted.row(half + i * stride);
    }
    s.fixed_ref = ReferenceSet{std::move(ref)};
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  }
  return s;
}

struct Stream {
  Matrix proposals;   // what the weighting methods see
  Vector log_gamma;   // target log density at proposals
  Matrix accepted;    // baseline-mcmc states (empty for gaussian-mc)
};

Stream make_stream(const ExperimentConfig& cfg, const SharedSetup& setup,
                   std::uint64_t chain_seed) {
  Stream st;
  if (cfg.experiment == "gaussian-mc") {
    Rng rng(chain_seed);
    st.proposals = setup.target.exact_sampler(cfg.n, rng);
    st.log_gamma.resize(cfg.n);
    for (Index i = 0; i < cfg.n; ++i) {
      st.log_gamma[i] = setup.target.log_gamma(st.proposals.row(i).transpose());
    }
  } else {
    const ChainRecord chain = ram_chain(setup.target, cfg.n, chain_seed);
    st.proposals = chain.proposals;
    st.log_gamma = chain.log_gamma_values;
    st.accepted = chain.accepted;
  }
  return st;
}

ReferenceSet make_reference(const ExperimentConfig& cfg, const SharedSetup& setup,
                            std::uint64_t ref_seed) {
  if (setup.fixed_ref) return *setup.fixed_ref;
  Rng rng(ref_seed);
  return ReferenceSet{setup.target.exact_sampler(cfg.ref_size, rng)};
}

}  // namespace

ExperimentOutput run_experiment(
    const ExperimentConfig& cfg,
    const std::function<void(const ResultRecord&)>& on_row) {
  const SharedSetup setup = build_setup(cfg);
  validate(cfg, setup.target.has_score());

  const int pool = cfg.threads > 0 ? cfg.threads : num_threads();
  const int n_methods = int(cfg.methods.size());
  std::vector<ResultRecord> rows(size_t(cfg.reps) * n_methods);
  std::vector<std::string> errors(cfg.reps);
  std::vector<std::uint8_t> done(cfg.reps, 0);
  std::mutex flush_mutex;
  int next_flush = 0;

  // Replicates are parallelized; inner linear algebra runs single-threaded so
  // the pool is not oversubscribed.
  const int saved_threads = num_threads();
  set_num_threads(1);

  auto run_replicate = [&](int rep) {
    const std::uint64_t chain_seed = derive_seed(cfg.seed, 2 * std::uint64_t(rep));
    const std::uint64_t ref_seed = derive_seed(cfg.seed, 2 * std::uint64_t(rep) + 1);
    const Stream stream = make_stream(cfg, setup, chain_seed);
    const ReferenceSet ref = make_reference(cfg, setup, ref_seed);

    for (int mi = 0; mi < n_methods; ++mi) {
      const std::string& method = cfg.methods[mi];
      ResultRecord rec;
      rec.experiment = cfg.experiment;
      rec.method = method;
      rec.replicate = rep;
      rec.seed = chain_seed;

      WeightedSampleSet ws;
      const auto t0 = Clock::now();
      if (method == "med") {
        MedConfig med_cfg = cfg.med;
        med_cfg.qp = cfg.qp;
        const MedResult r = med_weights(stream.proposals, stream.log_gamma, med_cfg);
        rec.wall_clock_seconds = seconds_since(t0);
        rec.solver_iterations = r.qp.iterations;
        ws = {stream.proposals, r.weights};
      } else if (method == "ksd") {
        const KsdResult r = ksd_weights(stream.proposals, setup.target.score, cfg.qp);
        rec.wall_clock_seconds = seconds_since(t0);
        rec.solver_iterations = r.qp.iterations;
        ws = {stream.proposals, r.weights};
      } else if (method == "kde") {
        const Vector w = kde_weights(stream.proposals, stream.log_gamma);
        rec.wall_clock_seconds = seconds_since(t0);
        ws = {stream.proposals, w};
      } else if (method == "baseline-mcmc") {
        if (stream.accepted.rows() == 0) {
          throw std::invalid_argument("baseline-mcmc needs an MCMC stream");
        }
        const Index n = stream.accepted.rows();
        ws = {stream.accepted, Vector::Constant(n, 1.0 / double(n))};
        rec.wall_clock_seconds = seconds_since(t0);
      } else {  // baseline-mc
        const Index n = stream.proposals.rows();
        ws = {stream.proposals, Vector::Constant(n, 1.0 / double(n))};
        rec.wall_clock_seconds = seconds_since(t0);
      }

      rec.energy_distance = energy_distance_simplified(ws, ref);
      if (cfg.eval_full) {
        rec.energy_distance_full = energy_distance_full(ws, ref, ref_seed);
      }
      if (cfg.eval_moments && setup.target.moments) {
        rec.moments = weighted_moment_errors(ws, *setup.target.moments);
      }
      rows[size_t(rep) * n_methods + mi] = std::move(rec);
    }
  };

  std::atomic<int> next_rep{0};
  auto worker = [&] {
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= cfg.reps) return;
      try {
        run_replicate(rep);
      } catch (const std::exception& e) {
        errors[rep] = e.what();
      }
      std::lock_guard<std::mutex> lock(flush_mutex);
      done[rep] = 1;
      while (next_flush < cfg.reps && done[next_flush]) {
        if (on_row && errors[next_flush].empty()) {
          for (int mi = 0; mi < n_methods; ++mi) {
            on_row(rows[size_t(next_flush) * n_methods + mi]);
          }
        }
        ++next_flush;
      }
    }
  };
  {
    std::vector<std::thread> threads;
    const int workers = std::min(pool, cfg.reps);
    threads.reserve(size_t(workers > 1 ? workers - 1 : 0));
    for (int t = 1; t < workers; ++t) threads.emplace_back(worker);
    worker();
    for (auto& th : threads) th.join();
  }
  set_num_threads(saved_threads);

  for (int rep = 0; rep < cfg.reps; ++rep) {
    if (!errors[rep].empty()) {
      throw std::runtime_error("replicate " + std::to_string(rep) +
                               " failed: " + errors[rep]);
    }
  }

  // Summary: per-method moments of the metric plus paired contrasts against
  // the baseline present in the method list.
  ExperimentOutput out;
  out.rows = std::move(rows);

  std::string baseline;
  for (const auto& m : cfg.methods) {
    if (m == "baseline-mcmc" || m == "baseline-mc") baseline = m;
  }
  const double norm =
      normalizes_by_dimension(cfg.experiment) ? std::sqrt(double(cfg.p)) : 1.0;

  nlohmann::json methods_json;
  for (int mi = 0; mi < n_methods; ++mi) {
    const std::string& method = cfg.methods[mi];
    Vector ed(cfg.reps);
    Vector wall(cfg.reps);
    for (int rep = 0; rep < cfg.reps; ++rep) {
      ed[rep] = out.rows[size_t(rep) * n_methods + mi].energy_distance;
      wall[rep] = out.rows[size_t(rep) * n_methods + mi].wall_clock_seconds;
    }
    const double mean = ed.mean();
    const double sd = cfg.reps > 1
                          ? std::sqrt((ed.array() - mean).square().sum() /
                                      double(cfg.reps - 1))
                          : 0.0;
    nlohmann::json mj = {
        {"mean_energy_distance", mean},
        {"sd_energy_distance", sd},
        {"mean_energy_distance_normalized", mean / norm},
        {"mean_wall_clock_seconds", wall.mean()},
    };
    if (!baseline.empty() && method != baseline) {
      int base_idx = -1;
      for (int k = 0; k < n_methods; ++k) {
        if (cfg.methods[k] == baseline) base_idx = k;
      }
      double diff_sum = 0.0;
      int wins = 0;
      for (int rep = 0; rep < cfg.reps; ++rep) {
        const double d =
            ed[rep] -
            out.rows[size_t(rep) * n_methods + base_idx].energy_distance;
        diff_sum += d;
        if (d < 0.0) ++wins;
      }
      mj["mean_paired_diff_vs_baseline"] = diff_sum / double(cfg.reps);
      mj["wins_vs_baseline"] = wins;
    }
    methods_json[method] = std::move(mj);
  }

  out.summary = {
      {"experiment", cfg.experiment},
      {"config", config_to_json(cfg)},
      {"baseline", baseline},
      {"replicates", cfg.reps},
      {"normalized_by_sqrt_p", normalizes_by_dimension(cfg.experiment)},
      {"methods", std::move(methods_json)},
  };
  return out;
}

CalibrationReport run_calibration_experiment(const ExperimentConfig& cfg) {
  const CalibrationProblem problem =
      calibration_target(derive_seed(cfg.seed, 0xDA7AULL));

  CalibrationReport report;

  // Ground truth: self-normalized importance sampling from the prior.
  const WeightedSampleSet is_set = self_normalized_is(
      problem.bundle, cfg.is_samples, derive_seed(cfg.seed, 1));
  report.p_is.setZero();
  for (Index i = 0; i < is_set.samples.rows(); ++i) {
    report.p_is[int(is_set.samples(i, 2))] += is_set.weights[i];
  }

  // Gibbs baseline: second half of one mixed chain, accepted states.
  const ChainRecord gibbs =
      gibbs_mixed_chain(problem.bundle, cfg.gibbs_steps, derive_seed(cfg.seed, 2));
  report.p_gibbs.setZero();
  const Index burn = gibbs.size() / 2;
  for (Index i = burn; i < gibbs.size(); ++i) {
    report.p_gibbs[int(gibbs.accepted(i, 2))] += 1.0;
  }
  report.p_gibbs /= double(gibbs.size() - burn);

  // Pooled per-level chains reweighted by minimum-energy weights.
  const Index per_level = cfg.chain_per_level;
  Matrix pooled(4 * per_level, 3);
  Vector pooled_lg(4 * per_level);
  for (int level = 0; level < 4; ++level) {
    const TargetBundle slice = calibration_slice(problem, level);
    Rng init_rng(derive_seed(cfg.seed, 10 + std::uint64_t(level)));
    Vector init(2);
    init << init_rng.uniform(), init_rng.uniform();
    RamOptions opt;
    opt.init = init;
    opt.initial_scale = cfg.calibration_ram_scale;
    const ChainRecord chain = ram_chain(
        slice, per_level, derive_seed(cfg.seed, 20 + std::uint64_t(level)), opt);
    for (Index i = 0; i < per_level; ++i) {
      const Index row = Index(level) * per_level + i;
      pooled(row, 0) = chain.proposals(i, 0);
      pooled(row, 1) = chain.proposals(i, 1);
      pooled(row, 2) = double(level);
      pooled_lg[row] = chain.log_gamma_values[i];
    }
  }

  const std::vector<DiscreteSpec> specs = {
      {.column = 2, .kind = DiscreteSpec::Kind::kOrdinal, .levels = 4}};
  const Matrix encoded = encode_discrete(pooled, specs);

  MedConfig med_cfg = cfg.med;
  med_cfg.qp = cfg.qp;
  const MedResult med = med_weights(encoded, pooled_lg, med_cfg);
  report.p_med.setZero();
  for (Index i = 0; i < pooled.rows(); ++i) {
    report.p_med[int(pooled(i, 2))] += med.weights[i];
  }

  nlohmann::json per_level_json;
  for (int k = 0; k < 4; ++k) {
    per_level_json.push_back({{"rho", k},
                              {"p_is", report.p_is[k]},
                              {"p_gibbs", report.p_gibbs[k]},
                              {"p_med", report.p_med[k]}});
  }
  report.summary = {
      {"experiment", "calibration-discrete"},
      {"config", config_to_json(cfg)},
      {"rho_true", problem.rho_true},
      {"levels", std::move(per_level_json)},
      {"med_abs_error_rho3", std::abs(report.p_med[3] - report.p_is[3])},
      {"gibbs_abs_error_rho3", std::abs(report.p_gibbs[3] - report.p_is[3])},
  };
  return report;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return {
      {"experiment", cfg.experiment},
      {"methods", cfg.methods},
      {"n", cfg.n},
      {"p", cfg.p},
      {"tau", cfg.tau},
      {"mixture_k", cfg.mixture_k},
      {"reps", cfg.reps},
      {"seed", cfg.seed},
      {"ref_size", cfg.ref_size},
      {"threads", cfg.threads},
      {"eval_full", cfg.eval_full},
      {"eval_moments", cfg.eval_moments},
      {"med",
       {{"k", cfg.med.k},
        {"delta", cfg.med.delta},
        {"filter", cfg.med.filter_enabled},
        {"jitter", cfg.med.jitter}}},
      {"qp",
       {{"max_iters", cfg.qp.max_iters},
        {"tol", cfg.qp.tol},
        {"step_rule", cfg.qp.step_rule == StepRule::kBacktracking
                          ? "backtracking"
                          : "fixed-from-spectral-bound"},
        {"power_iters", cfg.qp.power_iters}}},
      {"logistic",
       {{"obs", cfg.logistic_obs},
        {"features", cfg.logistic_features},
        {"prior_var", cfg.prior_var},
        {"ref_chain", cfg.logistic_ref_chain}}},
      {"calibration",
       {{"is_samples", cfg.is_samples},
        {"gibbs_steps", cfg.gibbs_steps},
        {"chain_per_level", cfg.chain_per_level},
        {"ram_scale", cfg.calibration_ram_scale}}},
  };
}

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("experiment", cfg.experiment);
  get("methods", cfg.methods);
  get("n", cfg.n);
  get("p", cfg.p);
  get("tau", cfg.tau);
  get("mixture_k", cfg.mixture_k);
  get("reps", cfg.reps);
  get("seed", cfg.seed);
  get("ref_size", cfg.ref_size);
  get("threads", cfg.threads);
  get("eval_full", cfg.eval_full);
  get("eval_moments", cfg.eval_moments);
  if (j.contains("med")) {
    const auto& m = j.at("med");
    if (m.contains("k")) cfg.med.k = m.at("k").get<double>();
    if (m.contains("delta")) cfg.med.delta = m.at("delta").get<double>();
    if (m.contains("filter")) cfg.med.filter_enabled = m.at("filter").get<bool>();
    if (m.contains("jitter")) cfg.med.jitter = m.at("jitter").get<double>();
  }
  if (j.contains("qp")) {
    const auto& q = j.at("qp");
    if (q.contains("max_iters")) cfg.qp.max_iters = q.at("max_iters").get<int>();
    if (q.contains("tol")) cfg.qp.tol = q.at("tol").get<double>();
    if (q.contains("power_iters")) cfg.qp.power_iters = q.at("power_iters").get<int>();
    if (q.contains("step_rule")) {
      const std::string rule = q.at("step_rule").get<std::string>();
      if (rule == "backtracking") cfg.qp.step_rule = StepRule::kBacktracking;
      else if (rule == "fixed-from-spectral-bound") {
        cfg.qp.step_rule = StepRule::kFixedFromSpectralBound;
      } else {
        throw std::invalid_argument("unknown step_rule: " + rule);
      }
    }
  }
  if (j.contains("logistic")) {
    const auto& l = j.at("logistic");
    if (l.contains("obs")) cfg.logistic_obs = l.at("obs").get<Index>();
    if (l.contains("features")) cfg.logistic_features = l.at("features").get<Index>();
    if (l.contains("prior_var")) cfg.prior_var = l.at("prior_var").get<double>();
    if (l.contains("ref_chain")) cfg.logistic_ref_chain = l.at("ref_chain").get<Index>();
  }
  if (j.contains("calibration")) {
    const auto& c = j.at("calibration");
    if (c.contains("is_samples")) cfg.is_samples = c.at("is_samples").get<Index>();
    if (c.contains("gibbs_steps")) cfg.gibbs_steps = c.at("gibbs_steps").get<Index>();
    if (c.contains("chain_per_level")) {
      cfg.chain_per_level = c.at("chain_per_level").get<Index>();
    }
    if (c.contains("ram_scale")) {
      cfg.calibration_ram_scale = c.at("ram_scale").get<double>();
    }
  }
}

void write_results_csv(const std::string& path,
                       const std::vector<ResultRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "experiment,method,replicate,seed,energy_distance,energy_distance_full,"
         "moment_err_mean,moment_err_diag,moment_err_sin,wall_clock_seconds,"
         "solver_iterations\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.method << ',' << r.replicate << ','
        << r.seed << ',' << format_double(r.energy_distance) << ',';
    if (r.energy_distance_full) out << format_double(*r.energy_distance_full);
    out << ',';
    if (r.moments) {
      out << format_double(r.moments->mean_sq_err) << ','
          << format_double(r.moments->diag_sq_err) << ','
          << format_double(r.moments->sin_sq_err);
    } else {
      out << ",,";
    }
    out << ',' << format_double(r.wall_clock_seconds) << ','
        << r.solver_iterations << '\n';
  }
}

}  // namespace bbis
