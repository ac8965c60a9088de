#pragma once

// Prediction-optimal selection of (lambda, h) per time-point on an independent
// validation set. Multi-stage estimators tune their initial stage first and
// keep it frozen while the final stage is searched.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "smoothlasso/error.hpp"
#include "smoothlasso/estimators.hpp"
#include "smoothlasso/parallel.hpp"
#include "smoothlasso/simulation.hpp"
#include "smoothlasso/solver.hpp"

namespace smoothlasso {

struct TuningGrid {
  /// Explicit lambda values (sorted descending). Empty: a geometric grid is
  /// anchored at lambda_max of every stage's own problem.
  std::vector<double> lambdas;
  Index lambda_count = 50;
  /// 0 selects 1e-3 when p < n and 1e-2 otherwise.
  double lambda_min_ratio = 0.0;
  /// Ascending, starting at 0. Empty: default_bandwidths(times).
  std::vector<double> bandwidths;
  Index bandwidth_count = 10;

  void validate() const {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (!(lambdas[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid lambdas must be positive");
      if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
        throw Error(ErrorCode::InvalidArgument, "grid lambdas must be strictly descending");
      }
    }
    if (lambdas.empty() && lambda_count < 2) throw Error(ErrorCode::InvalidArgument, "lambda_count must be >= 2");
    if (!(lambda_min_ratio >= 0.0 && lambda_min_ratio < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "lambda_min_ratio must lie in (0, 1)");
    }
    if (!bandwidths.empty()) {
      if (bandwidths.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "bandwidth grid must start at 0");
      for (std::size_t i = 1; i < bandwidths.size(); ++i) {
        if (!(bandwidths[i] > bandwidths[i - 1])) {
          throw Error(ErrorCode::InvalidArgument, "bandwidths must be strictly ascending");
        }
      }
    }
  }
};

/// Geometric sequence from lambda_max down to min_ratio * lambda_max.
inline std::vector<double> make_lambda_grid(double lambda_max, Index count, double min_ratio) {
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "count must be >= 2");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "min_ratio must lie in (0, 1)");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double log_ratio = std::log(min_ratio);
  for (Index k = 0; k < count; ++k) {
    grid[static_cast<std::size_t>(k)] =
        lambda_max * std::exp(log_ratio * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  grid.front() = lambda_max;
  grid.back() = lambda_max * min_ratio;
  return grid;
}

inline std::vector<double> make_lambda_grid(const DesignMatrix& X, const Vector& y, Index count, double min_ratio) {
  return make_lambda_grid(lambda_max(X, y), count, min_ratio);
}

/// {0} followed by `count` values geometric in [dt, N*dt/2], dt the mean grid spacing.
inline std::vector<double> default_bandwidths(const Vector& times, Index count = 10) {
  std::vector<double> h{0.0};
  const Index N = times.size();
  if (N < 2 || count < 1) return h;
  const double dt = (times(N - 1) - times(0)) / static_cast<double>(N - 1);
  const double lo = dt;
  const double hi = std::max(lo, static_cast<double>(N) * dt / 2.0);
  if (count == 1 || hi == lo) {
    h.push_back(lo);
    return h;
  }
  for (Index k = 0; k < count; ++k) {
    h.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1)));
  }
  return h;
}

/// (1/n_v) ||y_v - b0 - X_v beta||^2, X_v standardized with the training centers/scales.
inline double validation_loss(const LassoFit& fit, const Matrix& X_valid, const Vector& y_valid) {
  if (X_valid.rows() != y_valid.size() || X_valid.cols() != fit.coefficients.size()) {
    throw Error(ErrorCode::DimensionMismatch, "validation data does not match the fit");
  }
  if (y_valid.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty validation set");
  Vector r = y_valid;
  r.array() -= fit.intercept;
  for (Index j : fit.active_set) r.noalias() -= fit.coefficients(j) * X_valid.col(j);
  return r.squaredNorm() / static_cast<double>(y_valid.size());
}

namespace detail {

struct Cell {
  double lambda = 0.0;
  double bandwidth = 0.0;
  double loss = kInf;
};

/// Smaller loss wins; exact ties go to the larger lambda, then the larger h.
inline bool better(const Cell& a, const Cell& b) {
  if (a.loss != b.loss) return a.loss < b.loss;
  if (a.lambda != b.lambda) return a.lambda > b.lambda;
  return a.bandwidth > b.bandwidth;
}

struct TuneContext {
  const Problem& prob;
  Matrix X_valid;
  const Matrix& Y_valid;
  const TuningGrid& grid;
  std::vector<double> bandwidths;
  double min_ratio;
  Kernel kernel;
  double gamma;
  const SolverOptions& opts;
};

// Exhaustive search of one stage at time-point r. `init_for(h)` returns the
// adaptive initial coefficients for bandwidth h, or nullopt for a plain lasso.
inline Cell search_stage(const TuneContext& ctx, Index r, const std::vector<double>& bandwidths,
                         const std::function<std::optional<Vector>(double)>& init_for) {
  const Matrix& X = ctx.prob.X.values;
  const Vector y_valid = ctx.Y_valid.col(r);

  struct Candidate {
    double h;
    Vector y;
    std::optional<AdaptiveDesign> design;
  };
  std::vector<Candidate> candidates;
  double anchor = 0.0;
  for (double h : bandwidths) {
    std::optional<Vector> init;
    try {
      init = init_for(h);
    } catch (const Error&) {
      continue;  // initial stage undefined here; every cell at this h scores +inf
    }
    Candidate c{h, ctx.prob.response(r, h, ctx.kernel), std::nullopt};
    if (init) c.design.emplace(X, *init, ctx.gamma);
    anchor = std::max(anchor, c.design ? c.design->lambda_max(c.y) : lambda_max(X, c.y, Vector::Ones(X.cols())));
    candidates.push_back(std::move(c));
  }
  if (candidates.empty()) throw Error(ErrorCode::NotApplicable, "no admissible grid cell");

  std::vector<double> lambdas = ctx.grid.lambdas;
  if (lambdas.empty()) {
    lambdas = make_lambda_grid(anchor > 0.0 ? anchor : 1.0, ctx.grid.lambda_count, ctx.min_ratio);
  }

  Cell best;
  const Vector penalty = Vector::Ones(X.cols());
  for (const Candidate& c : candidates) {
    Vector warm = Vector::Zero(X.cols());
    for (double lambda : lambdas) {
      Cell cell{lambda, c.h, kInf};
      LassoFit fit = c.design ? c.design->solve(X, c.y, lambda, ctx.opts, &warm)
                              : coordinate_descent(X, c.y, lambda, penalty, ctx.opts, warm);
      warm = fit.coefficients;
      cell.loss = validation_loss(fit, ctx.X_valid, y_valid);
      if (!std::isfinite(cell.loss)) cell.loss = kInf;
      if (better(cell, best)) best = cell;
    }
  }
  if (!std::isfinite(best.loss)) throw Error(ErrorCode::NotApplicable, "every grid cell failed");
  return best;
}

inline StageParams tune_at(const EstimatorSpec& spec, const TuneContext& ctx, Index r,
                           const StageParams* frozen_initial) {
  const Problem& prob = ctx.prob;
  const std::vector<double> univariate{0.0};
  const std::vector<double>& smoothed = ctx.bandwidths;
  const auto plain = [](double) -> std::optional<Vector> { return std::nullopt; };
  StageParams out;

  switch (spec.id) {
    case 1:
    case 4: {
      const Cell c = search_stage(ctx, r, spec.id == 1 ? univariate : smoothed, plain);
      out.lambda = c.lambda;
      out.bandwidth = c.bandwidth;
      out.validation_loss = c.loss;
      return out;
    }
    case 2:
    case 5: {
      const EstimatorSpec s = spec;
      const auto ols_init = [&](double h) -> std::optional<Vector> {
        StageParams tmp;
        tmp.bandwidth = h;
        return initial_coefficients(s, prob, r, tmp, ctx.opts);
      };
      const Cell c = search_stage(ctx, r, spec.id == 2 ? univariate : smoothed, ols_init);
      out.lambda = c.lambda;
      out.bandwidth = c.bandwidth;
      if (spec.id == 5) out.init_bandwidth = c.bandwidth;
      out.validation_loss = c.loss;
      return out;
    }
    case 3:
    case 6:
    case 7: {
      // Stage A: the initial estimator (1, 4 or 3 respectively), then frozen.
      const int init_id = spec.id == 3 ? 1 : spec.id == 6 ? 4 : 3;
      StageParams initial;
      if (frozen_initial) {
        initial = *frozen_initial;
      } else {
        initial = tune_at(EstimatorSpec{init_id, spec.gamma, spec.kernel}, ctx, r, nullptr);
      }
      if (spec.id == 3) {
        out.init_lambda = initial.lambda;
      } else if (spec.id == 6) {
        out.init_lambda = initial.lambda;
        out.init_bandwidth = initial.bandwidth;
      } else {
        out.init_lambda = initial.init_lambda;
        out.mid_lambda = initial.lambda;
      }
      out.init_validation_loss = initial.validation_loss;
      const Vector init = initial_coefficients(spec, prob, r, out, ctx.opts);
      const auto frozen = [&](double) -> std::optional<Vector> { return init; };
      const Cell c = search_stage(ctx, r, spec.id == 3 ? univariate : smoothed, frozen);
      out.lambda = c.lambda;
      out.bandwidth = c.bandwidth;
      out.validation_loss = c.loss;
      return out;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "estimator id must be in 1..7");
}

}  // namespace detail

/// Id of the estimator whose tuned parameters form the frozen initial stage of
/// `id`, or 0 when `id` has none.
inline int initial_estimator_of(int id) {
  switch (id) {
    case 3: return 1;
    case 6: return 4;
    case 7: return 3;
    default: return 0;
  }
}

/// Tunes `spec` per time-point. `initial`, when given, holds the already tuned
/// parameters of initial_estimator_of(spec.id) and is reused as the frozen stage.
inline TunedParams tune_estimator(const EstimatorSpec& spec, const Problem& train, const TimeCourseDataset& valid,
                                  const TuningGrid& grid, const SolverOptions& opts = {},
                                  const TunedParams* initial = nullptr, int threads = 1) {
  spec.validate();
  grid.validate();
  valid.validate();
  if (valid.times.size() != train.times.size() || valid.times != train.times) {
    throw Error(ErrorCode::DimensionMismatch, "validation set must share the training time grid");
  }
  if (valid.X.cols() != train.X.cols()) throw Error(ErrorCode::DimensionMismatch, "validation p differs");
  if (spec.ols_initialized() && train.X.cols() >= train.X.rows()) {
    throw Error(ErrorCode::NotApplicable, "OLS-initialized estimators require p < n");
  }
  const Index N = train.time_points();
  if (initial && static_cast<Index>(initial->per_time.size()) != N) {
    throw Error(ErrorCode::DimensionMismatch, "initial-stage parameters must cover every time-point");
  }

  detail::TuneContext ctx{
      train,
      train.X.transform(valid.X),
      valid.Y,
      grid,
      grid.bandwidths.empty() ? default_bandwidths(train.times, grid.bandwidth_count) : grid.bandwidths,
      grid.lambda_min_ratio > 0.0 ? grid.lambda_min_ratio : (train.X.cols() < train.X.rows() ? 1e-3 : 1e-2),
      spec.kernel,
      spec.gamma,
      opts};

  TunedParams out;
  out.per_time.resize(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t r) {
    const StageParams* frozen = initial ? &initial->per_time[r] : nullptr;
    out.per_time[r] = detail::tune_at(spec, ctx, static_cast<Index>(r), frozen);
  });
  return out;
}

inline TunedParams tune_estimator(const EstimatorSpec& spec, const TimeCourseDataset& train,
                                  const TimeCourseDataset& valid, const TuningGrid& grid,
                                  const SolverOptions& opts = {}, int threads = 1) {
  return tune_estimator(spec, Problem::from(train), valid, grid, opts, nullptr, threads);
}

}  // namespace smoothlasso
