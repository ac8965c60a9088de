#pragma once

// Monte-Carlo benchmark: simulate training and validation sets, tune every
// requested estimator per time-point, fit, score against the truth and
// aggregate across runs.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothlasso/error.hpp"
#include "smoothlasso/estimators.hpp"
#include "smoothlasso/io.hpp"
#include "smoothlasso/metrics.hpp"
#include "smoothlasso/parallel.hpp"
#include "smoothlasso/random.hpp"
#include "smoothlasso/simulation.hpp"
#include "smoothlasso/tuning.hpp"

namespace smoothlasso {

struct BenchmarkConfig {
  int model = 1;
  Index n = 50;
  Index p = 8;
  Index N = 18;
  double sigma = 2.0;
  std::size_t runs = 100;
  std::vector<int> estimator_ids;  // empty: all applicable estimators
  TuningGrid grid;
  Kernel kernel = Kernel::Gaussian;
  double gamma = 1.0;
  std::uint64_t seed = 20100101;
  int threads = 1;
  SolverOptions solver;

  bool high_dimensional() const { return p >= n; }

  std::vector<int> estimators() const {
    if (!estimator_ids.empty()) return estimator_ids;
    if (high_dimensional()) return {1, 3, 4, 6, 7};
    return {1, 2, 3, 4, 5, 6, 7};
  }

  Index validation_size() const { return std::max<Index>(2, n / 2); }

  void validate() const {
    if (model != 1 && model != 2) throw Error(ErrorCode::InvalidArgument, "model must be 1 or 2");
    if (runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be >= 1");
    if (n < 4 || N < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 4 and N >= 2");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
    if (model == 1 && p < 3) throw Error(ErrorCode::TooFewColumns, "model 1 needs p >= 3");
    if (model == 2 && p < 8) throw Error(ErrorCode::TooFewColumns, "model 2 needs p >= 8");
    for (int id : estimators()) {
      if (id < 1 || id > 7) throw Error(ErrorCode::InvalidArgument, "estimator ids must be in 1..7");
      if (high_dimensional() && (id == 2 || id == 5)) {
        throw Error(ErrorCode::InvalidArgument, "OLS-initialized estimators 2 and 5 need p < n");
      }
    }
    grid.validate();
  }
};

inline void to_json(nlohmann::json& j, const BenchmarkConfig& c) {
  j = nlohmann::json{{"model", c.model},   {"n", c.n},
                     {"p", c.p},           {"N", c.N},
                     {"sigma", c.sigma},   {"runs", c.runs},
                     {"estimators", c.estimators()},
                     {"kernel", std::string(kernel_name(c.kernel))},
                     {"gamma", c.gamma},   {"seed", c.seed},
                     {"threads", c.threads}};
  nlohmann::json g{{"lambda_count", c.grid.lambda_count}, {"lambda_min_ratio", c.grid.lambda_min_ratio},
                   {"bandwidth_count", c.grid.bandwidth_count}};
  if (!c.grid.lambdas.empty()) g["lambdas"] = c.grid.lambdas;
  if (!c.grid.bandwidths.empty()) g["bandwidths"] = c.grid.bandwidths;
  j["grid"] = g;
  j["solver"] = {{"tolerance", c.solver.tolerance}, {"max_sweeps", c.solver.max_sweeps}};
}

/// Reads a config; absent keys keep their defaults, unknown keys are rejected.
inline BenchmarkConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{"model", "n",     "p",    "N",       "sigma",   "runs", "estimators",
                                              "kernel", "gamma", "seed", "threads", "grid",    "solver"};
  BenchmarkConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
      }
    }
    c.model = j.value("model", c.model);
    c.n = j.value("n", c.n);
    c.p = j.value("p", c.p);
    c.N = j.value("N", c.N);
    c.sigma = j.value("sigma", c.sigma);
    c.runs = j.value("runs", c.runs);
    if (j.contains("estimators")) c.estimator_ids = j["estimators"].get<std::vector<int>>();
    if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"].get<std::string>());
    c.gamma = j.value("gamma", c.gamma);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.grid.lambda_count = g.value("lambda_count", c.grid.lambda_count);
      c.grid.lambda_min_ratio = g.value("lambda_min_ratio", c.grid.lambda_min_ratio);
      c.grid.bandwidth_count = g.value("bandwidth_count", c.grid.bandwidth_count);
      if (g.contains("lambdas")) c.grid.lambdas = g["lambdas"].get<std::vector<double>>();
      if (g.contains("bandwidths")) c.grid.bandwidths = g["bandwidths"].get<std::vector<double>>();
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
      c.solver.max_sweeps = s.value("max_sweeps", c.solver.max_sweeps);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return c;
}

inline BenchmarkConfig load_config(const std::string& path) {
  try {
    return config_from_json(nlohmann::json::parse(detail::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

/// Training and validation sets of one Monte-Carlo run.
struct RunData {
  TimeCourseDataset train;
  TimeCourseDataset valid;
};

inline RunData simulate_run(const BenchmarkConfig& c, std::size_t run) {
  return RunData{simulate_dataset(c.model, c.n, c.p, c.sigma, c.N, derive_seed(c.seed, 2 * run)),
                 simulate_dataset(c.model, c.validation_size(), c.p, c.sigma, c.N, derive_seed(c.seed, 2 * run + 1))};
}

/// Tunes every id in `ids` on one run, reusing tuned initial stages.
inline std::map<int, TunedParams> tune_run(const BenchmarkConfig& c, const Problem& train,
                                           const TimeCourseDataset& valid, const std::vector<int>& ids,
                                           int threads = 1) {
  std::map<int, TunedParams> tuned;
  std::function<const TunedParams&(int)> get = [&](int id) -> const TunedParams& {
    if (auto it = tuned.find(id); it != tuned.end()) return it->second;
    const int init_id = initial_estimator_of(id);
    const TunedParams* initial = init_id ? &get(init_id) : nullptr;
    TunedParams t = tune_estimator(EstimatorSpec{id, c.gamma, c.kernel}, train, valid, c.grid, c.solver, initial, threads);
    return tuned.emplace(id, std::move(t)).first->second;
  };
  for (int id : ids) get(id);
  return tuned;
}

/// Metrics of every requested estimator for one run.
inline std::map<int, RunMetrics> evaluate_run(const BenchmarkConfig& c, std::size_t run) {
  const RunData data = simulate_run(c, run);
  const Problem train = Problem::from(data.train);
  const std::vector<int> ids = c.estimators();
  const auto tuned = tune_run(c, train, data.valid, ids);
  const Matrix Sigma = ar1_covariance(c.p, kDesignCorrelation);
  std::map<int, RunMetrics> out;
  for (int id : ids) {
    const TimeCourseFit fit = fit_timecourse(EstimatorSpec{id, c.gamma, c.kernel}, train, tuned.at(id), c.solver);
    out[id] = compute_metrics(fit, *data.train.truth, *data.train.truth_intercepts, Sigma);
  }
  return out;
}

struct BenchmarkResult {
  std::vector<ReportRow> rows;
  std::map<int, std::vector<RunMetrics>> per_run;
};

inline BenchmarkResult run_benchmark_detailed(const BenchmarkConfig& c,
                                              const std::function<void(std::size_t)>& on_run_done = {}) {
  c.validate();
  std::vector<std::map<int, RunMetrics>> results(c.runs);
  std::vector<std::optional<std::string>> failures(c.runs);
  parallel_for(c.runs, c.threads, [&](std::size_t run) {
    try {
      results[run] = evaluate_run(c, run);
    } catch (const std::exception& e) {
      failures[run] = e.what();
    }
    if (on_run_done) on_run_done(run);
  });
  for (std::size_t run = 0; run < c.runs; ++run) {
    if (failures[run]) {
      throw Error(ErrorCode::InvalidArgument, "benchmark run " + std::to_string(run) + " failed: " + *failures[run]);
    }
  }

  BenchmarkResult out;
  for (int id : c.estimators()) {
    auto& runs = out.per_run[id];
    for (const auto& r : results) runs.push_back(r.at(id));
    const AggregateMetrics agg = aggregate_runs(runs);
    const std::pair<const char*, const Summary*> cells[] = {
        {"mse_beta", &agg.mse_beta}, {"mse_pred", &agg.mse_pred}, {"msize", &agg.msize}, {"fp", &agg.fp}};
    for (const auto& [name, s] : cells) {
      out.rows.push_back(ReportRow{id, c.model, c.sigma, c.n, c.p, name, s->mean, s->sd, c.runs});
    }
  }
  return out;
}

inline std::vector<ReportRow> run_benchmark(const BenchmarkConfig& c) { return run_benchmark_detailed(c).rows; }

}  // namespace smoothlasso
