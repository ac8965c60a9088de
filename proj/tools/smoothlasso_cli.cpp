// smoothlasso: simulate, tune, fit and benchmark smoothed (adaptive) lasso
// estimators for time-courses of linear models.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smoothlasso/smoothlasso.hpp"

namespace sl = smoothlasso;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<int> estimators;
  std::optional<std::size_t> runs;
  std::optional<int> threads;
  std::optional<std::string> kernel;
  std::optional<int> model;
  std::optional<long> n, p, N;
  std::optional<double> sigma;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--kernel", o.kernel, "Kernel: gaussian | epanechnikov | uniform");
  cmd->add_option("--out", o.out, "Output path (default: stdout)");
}

void add_design(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--model", o.model, "Simulation model (1 or 2)");
  cmd->add_option("-n", o.n, "Training sample size");
  cmd->add_option("-p", o.p, "Number of predictors");
  cmd->add_option("--time-points", o.N, "Number of time-points N");
  cmd->add_option("--sigma", o.sigma, "Error standard deviation");
}

sl::BenchmarkConfig resolve(const Overrides& o) {
  sl::BenchmarkConfig c = o.config.empty() ? sl::BenchmarkConfig{} : sl::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.estimators.empty()) c.estimator_ids = o.estimators;
  if (o.runs) c.runs = *o.runs;
  if (o.threads) c.threads = *o.threads;
  if (o.kernel) c.kernel = sl::parse_kernel(*o.kernel);
  if (o.model) c.model = *o.model;
  if (o.n) c.n = *o.n;
  if (o.p) c.p = *o.p;
  if (o.N) c.N = *o.N;
  if (o.sigma) c.sigma = *o.sigma;
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sl::Error(sl::ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sl::Error(sl::ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> estimators_or_default(const sl::BenchmarkConfig& c, const std::vector<int>& ids, bool high_dim) {
  if (!ids.empty()) return ids;
  if (!c.estimator_ids.empty()) return c.estimator_ids;
  return high_dim ? std::vector<int>{1, 3, 4, 6, 7} : std::vector<int>{1, 2, 3, 4, 5, 6, 7};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed (adaptive) lasso for time-courses of linear models"};
  app.require_subcommand(1);

  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "Generate a simulated training (and validation) dataset");
  add_common(simulate, o);
  add_design(simulate, o);
  std::string valid_out;
  simulate->add_option("--valid-out", valid_out, "Also write an independent validation set of half the size");

  std::string train_path, valid_path, test_path, params_path;
  std::optional<double> fixed_lambda;
  double fixed_bandwidth = 0.0;

  auto* tune = app.add_subcommand("tune", "Tune (lambda, h) per time-point on a validation set");
  add_common(tune, o);
  tune->add_option("--train", train_path, "Training dataset CSV")->required()->check(CLI::ExistingFile);
  tune->add_option("--valid", valid_path, "Validation dataset CSV")->required()->check(CLI::ExistingFile);
  tune->add_option("--estimators", o.estimators, "Estimator ids (1-7)")->delimiter(',');
  tune->add_option("--threads", o.threads, "Worker threads");

  auto* fit = app.add_subcommand("fit", "Fit estimators with tuned or fixed parameters");
  add_common(fit, o);
  fit->add_option("--train", train_path, "Training dataset CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--params", params_path, "Tuned parameters JSON from `tune`")->check(CLI::ExistingFile);
  fit->add_option("--estimators", o.estimators, "Estimator ids with --lambda (1 or 4)")->delimiter(',');
  fit->add_option("--lambda", fixed_lambda, "Fixed lambda for every time-point (ids 1 and 4)");
  fit->add_option("--bandwidth", fixed_bandwidth, "Fixed bandwidth with --lambda (id 4)");
  fit->add_option("--test", test_path, "Held-out dataset CSV; prints mean prediction error")->check(CLI::ExistingFile);
  fit->add_option("--threads", o.threads, "Worker threads");

  auto* bench = app.add_subcommand("benchmark", "Monte-Carlo benchmark over simulated datasets");
  add_common(bench, o);
  add_design(bench, o);
  bench->add_option("--estimators", o.estimators, "Estimator ids (1-7)")->delimiter(',');
  bench->add_option("--runs", o.runs, "Monte-Carlo runs");
  bench->add_option("--threads", o.threads, "Worker threads (runs execute in parallel)");
  std::string format = "csv";
  bench->add_option("--format", format, "csv | table")->check(CLI::IsMember({"csv", "table"}));

  auto* report = app.add_subcommand("report", "Render a report CSV as a results table");
  std::string report_in;
  report->add_option("report", report_in, "Report CSV produced by `benchmark`")->required()->check(CLI::ExistingFile);
  report->add_option("--out", o.out, "Output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const sl::BenchmarkConfig c = resolve(o);
      const sl::RunData data = sl::simulate_run(c, 0);
      write_text(o.out, sl::dataset_to_csv(data.train));
      if (!valid_out.empty()) write_text(valid_out, sl::dataset_to_csv(data.valid));
    } else if (*tune) {
      const sl::BenchmarkConfig c = resolve(o);
      const sl::TimeCourseDataset train = sl::load_dataset(train_path);
      const sl::TimeCourseDataset valid = sl::load_dataset(valid_path);
      const sl::Problem prob = sl::Problem::from(train);
      const auto ids = estimators_or_default(c, o.estimators, train.p() >= train.n());
      const auto tuned = sl::tune_run(c, prob, valid, ids, c.threads);
      nlohmann::json out;
      out["estimators"] = nlohmann::json::array();
      for (int id : ids) {
        out["estimators"].push_back(sl::tuned_to_json(sl::EstimatorSpec{id, c.gamma, c.kernel}, tuned.at(id)));
      }
      write_text(o.out, out.dump(2) + "\n");
    } else if (*fit) {
      const sl::BenchmarkConfig c = resolve(o);
      const sl::TimeCourseDataset train = sl::load_dataset(train_path);
      const sl::Problem prob = sl::Problem::from(train);
      std::vector<std::pair<sl::EstimatorSpec, sl::TunedParams>> jobs;
      if (!params_path.empty()) {
        const auto j = nlohmann::json::parse(read_text(params_path));
        for (const auto& e : j.at("estimators")) jobs.push_back(sl::tuned_from_json(e));
      } else if (fixed_lambda) {
        const auto ids = o.estimators.empty() ? std::vector<int>{fixed_bandwidth > 0.0 ? 4 : 1} : o.estimators;
        for (int id : ids) {
          if (id != 1 && id != 4) throw sl::Error(sl::ErrorCode::InvalidArgument, "--lambda supports ids 1 and 4");
          sl::StageParams s;
          s.lambda = *fixed_lambda;
          s.bandwidth = id == 4 ? fixed_bandwidth : 0.0;
          sl::TunedParams t;
          t.per_time.assign(static_cast<std::size_t>(prob.time_points()), s);
          jobs.emplace_back(sl::EstimatorSpec{id, c.gamma, c.kernel}, t);
        }
      } else {
        throw sl::Error(sl::ErrorCode::InvalidArgument, "fit needs --params or --lambda");
      }
      std::vector<sl::TimeCourseFit> fits;
      for (const auto& [spec, params] : jobs) fits.push_back(sl::fit_timecourse(spec, prob, params, c.solver, c.threads));
      write_text(o.out, sl::coefficients_to_csv(fits, prob.times));
      if (!test_path.empty()) {
        const sl::TimeCourseDataset test = sl::load_dataset(test_path);
        const sl::Matrix Xt = prob.X.transform(test.X);
        for (const sl::TimeCourseFit& f : fits) {
          double loss = 0.0;
          for (sl::Index r = 0; r < f.time_points(); ++r) {
            loss += sl::validation_loss(f.fits[static_cast<std::size_t>(r)], Xt, test.Y.col(r));
          }
          std::cerr << "estimator " << f.spec.id << ": mean test MSE "
                    << loss / static_cast<double>(f.time_points()) << ", mean model size " << sl::model_size(f)
                    << "\n";
        }
      }
    } else if (*bench) {
      const sl::BenchmarkConfig c = resolve(o);
      const auto rows = sl::run_benchmark(c);
      write_text(o.out, format == "table" ? sl::report_to_table(rows) : sl::report_to_csv(rows));
    } else if (*report) {
      write_text(o.out, sl::report_to_table(sl::load_report(report_in)));
    }
  } catch (const sl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
