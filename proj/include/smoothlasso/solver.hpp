#pragma once

// Coordinate-descent solver for the l1-penalized least-squares problem
//
//   minimize  ||y - b0*1 - X*beta||_2^2 + lambda * sum_j tau_j |beta_j|
//
// with an unpenalized intercept b0. No 1/(2n) normalization is applied, so
// the orthogonal-design threshold is lambda/(2n) and the smallest lambda
// giving the zero solution is 2 * max_j |x_j' (y - mean(y))|.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smoothlasso/error.hpp"

namespace smoothlasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Design matrix together with the centering/scaling that produced it.
struct DesignMatrix {
  Matrix values;
  Vector column_centers;
  Vector column_scales;
  bool standardized = false;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  /// Wraps a matrix as-is (centers 0, scales 1, not flagged as standardized).
  static DesignMatrix wrap(Matrix m) {
    DesignMatrix d;
    d.column_centers = Vector::Zero(m.cols());
    d.column_scales = Vector::Ones(m.cols());
    d.values = std::move(m);
    return d;
  }

  /// Applies this design's centers/scales to new raw rows (e.g. validation data).
  Matrix transform(const Matrix& raw) const {
    if (raw.cols() != cols()) {
      throw Error(ErrorCode::DimensionMismatch, "transform: column count differs from design");
    }
    Matrix out = raw;
    for (Index j = 0; j < out.cols(); ++j) {
      out.col(j).array() -= column_centers(j);
      out.col(j) /= column_scales(j);
    }
    return out;
  }

  /// Coefficients on the raw column scale.
  Vector raw_coefficients(const Vector& beta) const {
    return beta.cwiseQuotient(column_scales);
  }

  /// Intercept of the raw-scale regression function.
  double raw_intercept(double intercept, const Vector& beta) const {
    return intercept - raw_coefficients(beta).dot(column_centers);
  }
};

struct SolverOptions {
  double tolerance = 1e-7;
  std::int64_t max_sweeps = 100000;
  /// tau_j >= 0; +inf fixes coordinate j at zero. Absent means tau_j = 1.
  std::optional<Vector> penalty_factors;
  /// Record the objective after every coordinate sweep into LassoFit::trace.
  bool record_trace = false;
  /// Replace the coordinate-descent iterate by the exact active-set solution
  /// when it is sign consistent and certifies the KKT conditions.
  bool polish = true;
};

struct LassoFit {
  double intercept = 0.0;
  Vector coefficients;
  std::vector<Index> active_set;
  double objective = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
  /// Set by the adaptive solver when every coordinate was excluded.
  bool all_excluded = false;
  std::vector<double> trace;

  void refresh_active_set() {
    active_set.clear();
    for (Index j = 0; j < coefficients.size(); ++j) {
      if (coefficients(j) != 0.0) active_set.push_back(j);
    }
  }
};

namespace diagnostics {
// Process-wide counters over all lasso_fit calls; used by the test suites to
// certify that every fit they produced passed the KKT check.
inline std::atomic<std::uint64_t> fits_total{0};
inline std::atomic<std::uint64_t> fits_failed_kkt{0};

inline void reset() {
  fits_total = 0;
  fits_failed_kkt = 0;
}
}  // namespace diagnostics

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline double default_kkt_tolerance(double lambda) { return 1e-6 * (1.0 + lambda); }

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or inf");
}

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or inf");
}

inline Vector resolve_penalty(const std::optional<Vector>& factors, Index p) {
  if (!factors) return Vector::Ones(p);
  if (factors->size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "penalty_factors length differs from column count");
  }
  for (Index j = 0; j < p; ++j) {
    if (std::isnan((*factors)(j)) || (*factors)(j) < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "penalty_factors must be nonnegative");
    }
  }
  return *factors;
}

inline double flush_subnormal(double v) {
  return std::fpclassify(v) == FP_SUBNORMAL ? 0.0 : v;
}

}  // namespace detail

/// ||y - b0 - X beta||^2 + lambda * sum tau_j |beta_j|, with 0 * inf := 0.
inline double lasso_objective(const Matrix& X, const Vector& y, double intercept,
                              const Vector& beta, double lambda, const Vector& penalty) {
  Vector r = y - X * beta;
  r.array() -= intercept;
  double pen = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) pen += penalty(j) * std::abs(beta(j));
  }
  return r.squaredNorm() + lambda * pen;
}

inline double lasso_objective(const DesignMatrix& X, const Vector& y, const LassoFit& fit,
                              double lambda, const Vector& penalty) {
  return lasso_objective(X.values, y, fit.intercept, fit.coefficients, lambda, penalty);
}

/// Largest KKT violation of (intercept, beta); 0 means exact optimality.
inline double kkt_violation(const Matrix& X, const Vector& y, double intercept,
                            const Vector& beta, double lambda, const Vector& penalty) {
  Vector r = y - X * beta;
  r.array() -= intercept;
  double worst = std::abs(r.sum());  // intercept stationarity
  for (Index j = 0; j < X.cols(); ++j) {
    const double tau = penalty(j);
    if (std::isinf(tau)) {
      if (beta(j) != 0.0) return kInf;
      continue;
    }
    const double grad = 2.0 * X.col(j).dot(r);
    double v;
    if (beta(j) != 0.0) {
      v = std::abs(grad - lambda * tau * (beta(j) > 0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(grad) - lambda * tau);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

inline bool kkt_satisfied(const DesignMatrix& X, const Vector& y, const LassoFit& fit,
                          double lambda, const Vector& penalty,
                          double tol = std::numeric_limits<double>::quiet_NaN()) {
  if (std::isnan(tol)) tol = default_kkt_tolerance(lambda);
  return kkt_violation(X.values, y, fit.intercept, fit.coefficients, lambda, penalty) <= tol;
}

inline DesignMatrix standardize_columns(const Matrix& raw) {
  const Index n = raw.rows();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "standardize_columns needs at least 2 rows");
  detail::require_finite(raw, "design matrix");
  DesignMatrix d;
  d.values = raw;
  d.column_centers.resize(raw.cols());
  d.column_scales.resize(raw.cols());
  for (Index j = 0; j < raw.cols(); ++j) {
    const double mean = raw.col(j).mean();
    d.values.col(j).array() -= mean;
    const double var = d.values.col(j).squaredNorm() / static_cast<double>(n);
    if (!(var > 0.0)) {
      throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(j) + " is constant");
    }
    const double scale = std::sqrt(var);
    d.values.col(j) /= scale;
    d.column_centers(j) = mean;
    d.column_scales(j) = scale;
  }
  d.standardized = true;
  return d;
}

/// 2 * max_j |x_j'(y - ybar)| / tau_j: the smallest lambda with an all-zero solution.
inline double lambda_max(const Matrix& X, const Vector& y, const Vector& penalty) {
  Vector yc = y.array() - y.mean();
  double best = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    if (std::isinf(penalty(j))) continue;
    const double g = 2.0 * std::abs(X.col(j).dot(yc));
    if (g == 0.0) continue;
    best = std::max(best, penalty(j) > 0.0 ? g / penalty(j) : kInf);
  }
  return best;
}

inline double lambda_max(const DesignMatrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "lambda_max: rows != len(y)");
  return lambda_max(X.values, y, Vector::Ones(X.cols()));
}

inline LassoFit ols_fit(const DesignMatrix& X, const Vector& y) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "ols_fit: rows != len(y)");
  if (p >= n) throw Error(ErrorCode::NotApplicable, "ols_fit requires p < n");
  detail::require_finite(X.values, "design matrix");
  detail::require_finite(y, "response");

  const Eigen::RowVectorXd means = X.values.colwise().mean();
  const Matrix xc = X.values.rowwise() - means;
  const double ybar = y.mean();
  const Vector yc = y.array() - ybar;

  const Matrix gram = xc.transpose() * xc;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= 1e-12)) {
    throw Error(ErrorCode::RankDeficient, "Gram matrix is numerically singular");
  }
  LassoFit fit;
  fit.coefficients = ldlt.solve(xc.transpose() * yc);
  fit.intercept = ybar - means.dot(fit.coefficients);
  fit.objective = lasso_objective(X.values, y, fit.intercept, fit.coefficients, 0.0, Vector::Ones(p));
  fit.converged = true;
  fit.refresh_active_set();
  return fit;
}

namespace detail {

/// Exact minimizer restricted to the sign pattern `signs` on `active`.
/// Returns nullopt when the restricted Gram matrix is singular.
inline std::optional<std::pair<double, Vector>> solve_sign_pattern(
    const Matrix& X, const Vector& y, double lambda, const Vector& penalty,
    const std::vector<Index>& active, const std::vector<double>& signs) {
  const Index p = X.cols();
  const double ybar = y.mean();
  Vector beta = Vector::Zero(p);
  if (active.empty()) return std::make_pair(ybar, beta);

  const Index k = static_cast<Index>(active.size());
  Matrix xa(X.rows(), k);
  Vector means(k);
  for (Index a = 0; a < k; ++a) {
    means(a) = X.col(active[a]).mean();
    xa.col(a) = X.col(active[a]).array() - means(a);
  }
  const Vector yc = y.array() - ybar;
  Vector rhs = xa.transpose() * yc;
  for (Index a = 0; a < k; ++a) rhs(a) -= 0.5 * lambda * penalty(active[a]) * signs[a];
  Eigen::LDLT<Matrix> ldlt(xa.transpose() * xa);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= 1e-12)) return std::nullopt;
  const Vector sol = ldlt.solve(rhs);
  for (Index a = 0; a < k; ++a) beta(active[a]) = sol(a);
  return std::make_pair(ybar - means.dot(sol), beta);
}

inline LassoFit coordinate_descent(const Matrix& X, const Vector& y, double lambda,
                                   const Vector& penalty, const SolverOptions& opts,
                                   const Vector& start) {
  const Index n = X.rows();
  const Index p = X.cols();

  std::vector<Index> working;
  Vector norms(p);
  for (Index j = 0; j < p; ++j) {
    norms(j) = X.col(j).squaredNorm();
    if (!std::isinf(penalty(j)) && norms(j) > 0.0) working.push_back(j);
  }

  Vector beta = Vector::Zero(p);
  for (Index j : working) beta(j) = start(j);
  Vector r = y - X * beta;
  double intercept = r.mean();
  r.array() -= intercept;

  LassoFit fit;
  const auto objective = [&] {
    double pen = 0.0;
    for (Index j : working) {
      if (beta(j) != 0.0) pen += penalty(j) * std::abs(beta(j));
    }
    return r.squaredNorm() + lambda * pen;
  };

  const auto sweep = [&](const std::vector<Index>& coords) {
    double max_change = 0.0;
    for (Index j : coords) {
      const double old = beta(j);
      const double z = X.col(j).dot(r) + norms(j) * old;
      const double updated = detail::flush_subnormal(soft_threshold(z, 0.5 * lambda * penalty(j)) / norms(j));
      const double delta = updated - old;
      if (delta != 0.0) {
        r.noalias() -= delta * X.col(j);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    const double shift = r.mean();
    if (shift != 0.0) {
      intercept += shift;
      r.array() -= shift;
    }
    return max_change;
  };

  const double kkt_tol = default_kkt_tolerance(lambda);
  std::vector<Index> active;
  bool full = true;
  bool certified = false;
  std::int64_t sweeps = 0;
  while (sweeps < opts.max_sweeps) {
    if (!full) {
      active.clear();
      for (Index j : working) {
        if (beta(j) != 0.0) active.push_back(j);
      }
    }
    const double change = sweep(full ? working : active);
    ++sweeps;
    if (opts.record_trace) fit.trace.push_back(objective());
    if (change >= opts.tolerance) {
      full = false;
      continue;
    }
    if (!full) {
      full = true;
      continue;
    }
    // A full sweep moved nothing by more than the tolerance.
    if (opts.polish) {
      std::vector<Index> support;
      std::vector<double> signs;
      for (Index j : working) {
        if (beta(j) != 0.0) {
          support.push_back(j);
          signs.push_back(beta(j) > 0 ? 1.0 : -1.0);
        }
      }
      if (static_cast<Index>(support.size()) < n) {
        if (auto exact = solve_sign_pattern(X, y, lambda, penalty, support, signs)) {
          bool consistent = true;
          for (std::size_t a = 0; a < support.size(); ++a) {
            if (exact->second(support[a]) * signs[a] <= 0.0) consistent = false;
          }
          if (consistent) {
            const double current = objective();
            const double candidate =
                lasso_objective(X, y, exact->first, exact->second, lambda, penalty);
            if (candidate <= current + 1e-12 * (1.0 + std::abs(current)) &&
                kkt_violation(X, y, exact->first, exact->second, lambda, penalty) <= kkt_tol) {
              beta = exact->second;
              intercept = exact->first;
              r = y - X * beta;
              r.array() -= intercept;
              certified = true;
              break;
            }
          }
        }
      }
    }
    if (kkt_violation(X, y, intercept, beta, lambda, penalty) <= kkt_tol) {
      certified = true;
      break;
    }
  }

  fit.intercept = intercept;
  fit.coefficients = std::move(beta);
  fit.iterations = sweeps;
  fit.objective = lasso_objective(X, y, fit.intercept, fit.coefficients, lambda, penalty);
  fit.converged = certified;
  fit.refresh_active_set();
  ++diagnostics::fits_total;
  if (!certified) ++diagnostics::fits_failed_kkt;
  return fit;
}

inline void check_lasso_inputs(const Matrix& X, const Vector& y, double lambda,
                               const SolverOptions& opts) {
  if (y.size() != X.rows()) throw Error(ErrorCode::DimensionMismatch, "lasso_fit: rows != len(y)");
  if (!(lambda >= 0.0) || std::isinf(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  }
  if (!(opts.tolerance > 0.0) || opts.max_sweeps < 1) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerance must be > 0 and max_sweeps >= 1");
  }
  require_finite(X, "design matrix");
  require_finite(y, "response");
}

}  // namespace detail

/// Solves the weighted lasso from a warm start. Coordinates with tau_j = +inf
/// never enter the working set and stay exactly zero.
inline LassoFit lasso_fit(const DesignMatrix& X, const Vector& y, double lambda,
                          const SolverOptions& opts, const Vector& warm_start) {
  detail::check_lasso_inputs(X.values, y, lambda, opts);
  if (warm_start.size() != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "warm start length differs from column count");
  }
  const Vector penalty = detail::resolve_penalty(opts.penalty_factors, X.cols());
  return detail::coordinate_descent(X.values, y, lambda, penalty, opts, warm_start);
}

inline LassoFit lasso_fit(const DesignMatrix& X, const Vector& y, double lambda,
                          const SolverOptions& opts = {}) {
  return lasso_fit(X, y, lambda, opts, Vector::Zero(X.cols()));
}

/// Exact minimizer by enumerating all 3^p sign patterns. Test oracle; p <= 10.
inline LassoFit lasso_bruteforce(const DesignMatrix& X, const Vector& y, double lambda,
                                 const Vector& penalty_factors) {
  const Index p = X.cols();
  if (p > 10) throw Error(ErrorCode::TooLarge, "lasso_bruteforce supports p <= 10");
  if (y.size() != X.rows()) throw Error(ErrorCode::DimensionMismatch, "rows != len(y)");
  if (penalty_factors.size() != p) throw Error(ErrorCode::DimensionMismatch, "penalty length");

  const double kkt_tol = 1e-7 * (1.0 + lambda) * (1.0 + y.lpNorm<Eigen::Infinity>());
  std::optional<std::pair<double, Vector>> best;
  double best_obj = kInf;
  std::optional<std::pair<double, Vector>> fallback;
  double fallback_obj = kInf;

  std::int64_t patterns = 1;
  for (Index j = 0; j < p; ++j) patterns *= 3;
  for (std::int64_t code = 0; code < patterns; ++code) {
    std::vector<Index> active;
    std::vector<double> signs;
    std::int64_t c = code;
    bool admissible = true;
    for (Index j = 0; j < p; ++j) {
      const int digit = static_cast<int>(c % 3);
      c /= 3;
      if (digit == 0) continue;
      if (std::isinf(penalty_factors(j))) admissible = false;
      active.push_back(j);
      signs.push_back(digit == 1 ? 1.0 : -1.0);
    }
    if (!admissible) continue;
    auto sol = detail::solve_sign_pattern(X.values, y, lambda, penalty_factors, active, signs);
    if (!sol) continue;
    bool consistent = true;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (sol->second(active[a]) * signs[a] <= 0.0) consistent = false;
    }
    if (!consistent) continue;
    const double obj = lasso_objective(X.values, y, sol->first, sol->second, lambda, penalty_factors);
    if (obj < fallback_obj) {
      fallback_obj = obj;
      fallback = sol;
    }
    if (kkt_violation(X.values, y, sol->first, sol->second, lambda, penalty_factors) <= kkt_tol &&
        obj < best_obj) {
      best_obj = obj;
      best = sol;
    }
  }
  if (!best) best = fallback;
  LassoFit fit;
  fit.intercept = best->first;
  fit.coefficients = best->second;
  fit.objective = lasso_objective(X.values, y, fit.intercept, fit.coefficients, lambda, penalty_factors);
  fit.converged = true;
  fit.refresh_active_set();
  return fit;
}

}  // namespace smoothlasso
