#pragma once

// The seven estimator pipelines:
//
//   1. Lasso                          4. Smoothed Lasso
//   2. Adaptive Lasso, OLS init       5. Smoothed Adaptive Lasso, smoothed-OLS init
//   3. Adaptive Lasso, Lasso init     6. Smoothed Adaptive Lasso, init = 4
//                                     7. Smoothed Adaptive Lasso, init = 3
//
// Ids 1-3 use only the response at the current time-point; ids 4-7 fit the
// kernel-smoothed response. Adaptive stages use tau_j = 1/|beta_init,j|^gamma,
// realized by rescaling column j by |beta_init,j|^gamma.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "smoothlasso/error.hpp"
#include "smoothlasso/parallel.hpp"
#include "smoothlasso/simulation.hpp"
#include "smoothlasso/smoothing.hpp"
#include "smoothlasso/solver.hpp"

namespace smoothlasso {

struct EstimatorSpec {
  int id = 1;
  double gamma = 1.0;
  Kernel kernel = Kernel::Gaussian;

  bool smoothed() const { return id >= 4; }
  bool adaptive() const { return id != 1 && id != 4; }
  bool ols_initialized() const { return id == 2 || id == 5; }

  void validate() const {
    if (id < 1 || id > 7) throw Error(ErrorCode::InvalidArgument, "estimator id must be in 1..7");
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
  }
};

inline std::string estimator_label(int id) {
  switch (id) {
    case 1: return "Lasso";
    case 2: return "Adapt. Lasso with OLS";
    case 3: return "Adapt. Lasso with univ. Lasso";
    case 4: return "Smoothed Lasso";
    case 5: return "Adapt. Lasso with smoothed OLS";
    case 6: return "Adaptive Lasso with 4.";
    case 7: return "Adaptive Lasso with 3.";
  }
  return "unknown";
}

/// Tuning parameters of every stage at one time-point.
struct StageParams {
  double lambda = 0.0;     // final stage
  double bandwidth = 0.0;  // final stage, ids 4-7
  std::optional<double> init_lambda;     // Lasso initial stage: ids 3, 6, 7
  std::optional<double> init_bandwidth;  // smoothed initial stage: ids 5, 6
  std::optional<double> mid_lambda;      // id 7: univariate adaptive stage
  double validation_loss = 0.0;
  double init_validation_loss = 0.0;

  bool operator==(const StageParams&) const = default;
};

inline void validate_params(const EstimatorSpec& spec, const StageParams& p) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "estimator " + std::to_string(spec.id) + ": " + why);
  };
  if (!(p.lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(p.bandwidth >= 0.0)) fail("bandwidth must be >= 0");
  if (!spec.smoothed() && (p.bandwidth != 0.0 || p.init_bandwidth)) fail("univariate estimators carry no bandwidth");
  const bool needs_init_lambda = spec.id == 3 || spec.id == 6 || spec.id == 7;
  if (needs_init_lambda && !p.init_lambda) fail("missing initial-stage lambda");
  if (spec.id == 6 && !p.init_bandwidth) fail("missing initial-stage bandwidth");
  if (spec.id == 5 && p.init_bandwidth && *p.init_bandwidth != p.bandwidth) {
    fail("the smoothed-OLS initial stage shares the final bandwidth");
  }
  if (spec.id == 7 && !p.mid_lambda) fail("missing adaptive-stage lambda");
}

struct TunedParams {
  std::vector<StageParams> per_time;
};

struct TimeCourseFit {
  std::vector<LassoFit> fits;
  EstimatorSpec spec;
  TunedParams params_used;
  Vector column_centers;
  Vector column_scales;

  Index time_points() const { return static_cast<Index>(fits.size()); }

  /// Coefficients of the regression function on the raw covariate scale.
  Vector raw_coefficients(Index r) const {
    return fits[static_cast<std::size_t>(r)].coefficients.cwiseQuotient(column_scales);
  }

  double raw_intercept(Index r) const {
    return fits[static_cast<std::size_t>(r)].intercept - raw_coefficients(r).dot(column_centers);
  }
};

/// Standardized training problem shared by all time-points.
struct Problem {
  DesignMatrix X;
  Matrix Y;
  Vector times;

  static Problem from(const TimeCourseDataset& data) {
    data.validate();
    return Problem{standardize_columns(data.X), data.Y, data.times};
  }

  Index time_points() const { return Y.cols(); }

  Vector response(Index r, double h, Kernel kernel) const {
    if (h == 0.0) return Y.col(r);
    return smooth_response(Y, smoothing_weights(times, r, h, kernel));
  }
};

inline Vector adaptive_penalty_weights(const Vector& beta_init, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
  Vector tau(beta_init.size());
  for (Index j = 0; j < beta_init.size(); ++j) {
    const double a = std::abs(beta_init(j));
    tau(j) = a == 0.0 ? kInf : 1.0 / std::pow(a, gamma);
  }
  return tau;
}

/// Column-rescaled design |beta_init,j|^gamma * x_j restricted to the columns
/// with a nonzero initial coefficient.
class AdaptiveDesign {
 public:
  AdaptiveDesign(const Matrix& X, const Vector& beta_init, double gamma) : p_(X.cols()) {
    if (beta_init.size() != p_) throw Error(ErrorCode::DimensionMismatch, "beta_init length differs from p");
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
    for (Index j = 0; j < p_; ++j) {
      if (beta_init(j) != 0.0) kept_.push_back(j);
    }
    const Index k = static_cast<Index>(kept_.size());
    scales_.resize(k);
    reduced_.resize(X.rows(), k);
    for (Index a = 0; a < k; ++a) {
      const Index j = kept_[static_cast<std::size_t>(a)];
      scales_(a) = gamma == 1.0 ? std::abs(beta_init(j)) : std::pow(std::abs(beta_init(j)), gamma);
      reduced_.col(a) = X.col(j) * scales_(a);
    }
    penalty_ = adaptive_penalty_weights(beta_init, gamma);
  }

  bool empty() const { return kept_.empty(); }
  const Matrix& reduced() const { return reduced_; }
  const Vector& penalty() const { return penalty_; }

  double lambda_max(const Vector& y) const {
    return smoothlasso::lambda_max(reduced_, y, Vector::Ones(reduced_.cols()));
  }

  /// Maps a full-scale coefficient vector onto the reduced, rescaled problem.
  Vector to_reduced(const Vector& beta) const {
    Vector out(scales_.size());
    for (Index a = 0; a < scales_.size(); ++a) out(a) = beta(kept_[static_cast<std::size_t>(a)]) / scales_(a);
    return out;
  }

  Vector to_full(const Vector& reduced_beta) const {
    Vector out = Vector::Zero(p_);
    for (Index a = 0; a < scales_.size(); ++a) {
      out(kept_[static_cast<std::size_t>(a)]) = reduced_beta(a) * scales_(a);
    }
    return out;
  }

  LassoFit solve(const Matrix& X, const Vector& y, double lambda, const SolverOptions& opts,
                 const Vector* warm_start = nullptr) const {
    detail::check_lasso_inputs(X, y, lambda, opts);
    LassoFit fit;
    if (empty()) {
      fit.intercept = y.mean();
      fit.coefficients = Vector::Zero(p_);
      fit.converged = true;
      fit.all_excluded = true;
    } else {
      SolverOptions inner = opts;
      inner.penalty_factors.reset();
      const Vector start = warm_start ? to_reduced(*warm_start) : Vector::Zero(reduced_.cols());
      LassoFit r = detail::coordinate_descent(reduced_, y, lambda, Vector::Ones(reduced_.cols()), inner, start);
      fit.intercept = r.intercept;
      fit.coefficients = to_full(r.coefficients);
      fit.iterations = r.iterations;
      fit.converged = r.converged;
      fit.trace = std::move(r.trace);
    }
    fit.objective = lasso_objective(X, y, fit.intercept, fit.coefficients, lambda, penalty_);
    fit.refresh_active_set();
    return fit;
  }

 private:
  Index p_;
  std::vector<Index> kept_;
  Vector scales_;
  Matrix reduced_;
  Vector penalty_;
};

/// Weighted-penalty lasso with tau_j = 1/|beta_init,j|^gamma. An identically
/// zero beta_init yields the intercept-only fit flagged all_excluded.
inline LassoFit adaptive_lasso_fit(const DesignMatrix& X, const Vector& y, double lambda,
                                   const Vector& beta_init, double gamma,
                                   const SolverOptions& opts = {}) {
  return AdaptiveDesign(X.values, beta_init, gamma).solve(X.values, y, lambda, opts);
}

namespace detail {

inline double require(const std::optional<double>& v, const char* what) {
  if (!v) throw Error(ErrorCode::InvalidArgument, std::string("missing ") + what);
  return *v;
}

}  // namespace detail

/// Initial coefficients of an adaptive pipeline at time-point r.
inline Vector initial_coefficients(const EstimatorSpec& spec, const Problem& prob, Index r,
                                   const StageParams& params, const SolverOptions& opts) {
  const DesignMatrix& X = prob.X;
  switch (spec.id) {
    case 2:
      return ols_fit(X, prob.Y.col(r)).coefficients;
    case 3:
      return lasso_fit(X, prob.Y.col(r), detail::require(params.init_lambda, "init_lambda"), opts).coefficients;
    case 5:
      return ols_fit(X, prob.response(r, params.bandwidth, spec.kernel)).coefficients;
    case 6:
      return lasso_fit(X, prob.response(r, detail::require(params.init_bandwidth, "init_bandwidth"), spec.kernel),
                       detail::require(params.init_lambda, "init_lambda"), opts)
          .coefficients;
    case 7: {
      const Vector y = prob.Y.col(r);
      const Vector first = lasso_fit(X, y, detail::require(params.init_lambda, "init_lambda"), opts).coefficients;
      return adaptive_lasso_fit(X, y, detail::require(params.mid_lambda, "mid_lambda"), first, spec.gamma, opts)
          .coefficients;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "estimator " + std::to_string(spec.id) + " has no initial stage");
  }
}

inline LassoFit fit_estimator_at(const EstimatorSpec& spec, const Problem& prob, Index r,
                                 const StageParams& params, const SolverOptions& opts = {}) {
  spec.validate();
  validate_params(spec, params);
  if (r < 0 || r >= prob.time_points()) throw Error(ErrorCode::InvalidArgument, "time index out of range");
  if (spec.ols_initialized() && prob.X.cols() >= prob.X.rows()) {
    throw Error(ErrorCode::NotApplicable, "OLS-initialized estimators require p < n");
  }
  const Vector y = prob.response(r, spec.smoothed() ? params.bandwidth : 0.0, spec.kernel);
  if (!spec.adaptive()) return lasso_fit(prob.X, y, params.lambda, opts);
  const Vector init = initial_coefficients(spec, prob, r, params, opts);
  return adaptive_lasso_fit(prob.X, y, params.lambda, init, spec.gamma, opts);
}

inline LassoFit fit_estimator_at(const EstimatorSpec& spec, const TimeCourseDataset& data, Index r,
                                 const StageParams& params, const SolverOptions& opts = {}) {
  return fit_estimator_at(spec, Problem::from(data), r, params, opts);
}

inline TimeCourseFit fit_timecourse(const EstimatorSpec& spec, const Problem& prob, const TunedParams& tuned,
                                    const SolverOptions& opts = {}, int threads = 1) {
  const Index N = prob.time_points();
  if (static_cast<Index>(tuned.per_time.size()) != N) {
    throw Error(ErrorCode::DimensionMismatch, "tuned parameters must cover every time-point");
  }
  TimeCourseFit out;
  out.spec = spec;
  out.params_used = tuned;
  out.column_centers = prob.X.column_centers;
  out.column_scales = prob.X.column_scales;
  out.fits.resize(static_cast<std::size_t>(N));
  std::vector<std::optional<Error>> errors(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t r) {
    try {
      out.fits[r] = fit_estimator_at(spec, prob, static_cast<Index>(r), tuned.per_time[r], opts);
    } catch (const Error& e) {
      errors[r] = e;
    }
  });
  std::string joined;
  std::optional<ErrorCode> first;
  for (std::size_t r = 0; r < errors.size(); ++r) {
    if (!errors[r]) continue;
    if (!first) first = errors[r]->code();
    joined += "[t=" + std::to_string(r) + "] " + errors[r]->what() + "; ";
  }
  if (first) throw Error(*first, "fit_timecourse: " + joined);
  return out;
}

inline TimeCourseFit fit_timecourse(const EstimatorSpec& spec, const TimeCourseDataset& data,
                                    const TunedParams& tuned, const SolverOptions& opts = {}, int threads = 1) {
  return fit_timecourse(spec, Problem::from(data), tuned, opts, threads);
}

}  // namespace smoothlasso
