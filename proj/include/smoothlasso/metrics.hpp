#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "smoothlasso/error.hpp"
#include "smoothlasso/estimators.hpp"
#include "smoothlasso/solver.hpp"

namespace smoothlasso {

struct RunMetrics {
  double mse_beta = 0.0;
  double mse_pred = 0.0;
  double msize = 0.0;
  double fp = 0.0;
};

namespace detail {

inline void check_truth(const TimeCourseFit& fit, const Matrix& truth) {
  if (truth.cols() != fit.time_points()) throw Error(ErrorCode::DimensionMismatch, "truth has wrong column count");
  for (const LassoFit& f : fit.fits) {
    if (f.coefficients.size() != truth.rows()) throw Error(ErrorCode::DimensionMismatch, "truth has wrong row count");
  }
  if (fit.time_points() == 0) throw Error(ErrorCode::DimensionMismatch, "empty time-course");
}

}  // namespace detail

/// (1/N) sum_r ||betahat(t_r) - beta(t_r)||^2 with betahat on the raw covariate scale.
inline double mse_beta(const TimeCourseFit& fit, const Matrix& truth) {
  detail::check_truth(fit, truth);
  double total = 0.0;
  for (Index r = 0; r < fit.time_points(); ++r) {
    total += (fit.raw_coefficients(r) - truth.col(r)).squaredNorm();
  }
  return total / static_cast<double>(fit.time_points());
}

/// (1/N) sum_r [(b0hat - b0)^2 + (betahat - beta)' Sigma (betahat - beta)] for the
/// fitted regression function on the raw covariates.
inline double mse_pred(const TimeCourseFit& fit, const Matrix& truth, const Vector& truth_intercepts,
                       const Matrix& Sigma) {
  detail::check_truth(fit, truth);
  if (truth_intercepts.size() != truth.cols()) throw Error(ErrorCode::DimensionMismatch, "intercepts need N entries");
  if (Sigma.rows() != truth.rows() || Sigma.cols() != truth.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Sigma must be p x p");
  }
  double total = 0.0;
  for (Index r = 0; r < fit.time_points(); ++r) {
    const Vector d = fit.raw_coefficients(r) - truth.col(r);
    const double di = fit.raw_intercept(r) - truth_intercepts(r);
    total += di * di + d.dot(Sigma * d);
  }
  return total / static_cast<double>(fit.time_points());
}

inline double model_size(const TimeCourseFit& fit) {
  if (fit.time_points() == 0) return 0.0;
  double total = 0.0;
  for (const LassoFit& f : fit.fits) {
    for (Index j = 0; j < f.coefficients.size(); ++j) total += f.coefficients(j) != 0.0 ? 1.0 : 0.0;
  }
  return total / static_cast<double>(fit.time_points());
}

inline double false_positives(const TimeCourseFit& fit, const Matrix& truth) {
  detail::check_truth(fit, truth);
  double total = 0.0;
  for (Index r = 0; r < fit.time_points(); ++r) {
    const Vector& b = fit.fits[static_cast<std::size_t>(r)].coefficients;
    for (Index j = 0; j < b.size(); ++j) {
      if (b(j) != 0.0 && truth(j, r) == 0.0) total += 1.0;
    }
  }
  return total / static_cast<double>(fit.time_points());
}

inline RunMetrics compute_metrics(const TimeCourseFit& fit, const Matrix& truth, const Vector& truth_intercepts,
                                  const Matrix& Sigma) {
  return RunMetrics{mse_beta(fit, truth), mse_pred(fit, truth, truth_intercepts, Sigma), model_size(fit),
                    false_positives(fit, truth)};
}

struct Summary {
  double mean = 0.0;
  std::optional<double> sd;  // absent for a single run
};

struct AggregateMetrics {
  Summary mse_beta, mse_pred, msize, fp;
  std::size_t runs = 0;
};

inline Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::EmptyList, "nothing to summarize");
  const double m = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  Summary s{sum / m, std::nullopt};
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (m - 1.0));
  }
  return s;
}

/// Sample mean and sample standard deviation (divisor m - 1), in list order.
inline AggregateMetrics aggregate_runs(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) throw Error(ErrorCode::EmptyList, "aggregate_runs needs at least one run");
  std::vector<double> a, b, c, d;
  for (const RunMetrics& m : runs) {
    a.push_back(m.mse_beta);
    b.push_back(m.mse_pred);
    c.push_back(m.msize);
    d.push_back(m.fp);
  }
  return AggregateMetrics{summarize(a), summarize(b), summarize(c), summarize(d), runs.size()};
}

}  // namespace smoothlasso
