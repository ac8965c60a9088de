#pragma once

// Simulation designs for time-courses of linear models: an equidistant grid on
// [0, 2*pi], two coefficient functions, AR(1)-correlated Gaussian designs and
// i.i.d. Gaussian errors.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "smoothlasso/error.hpp"
#include "smoothlasso/random.hpp"
#include "smoothlasso/solver.hpp"

namespace smoothlasso {

struct TimeCourseDataset {
  Matrix X;  // n x p, raw
  Matrix Y;  // n x N
  Vector times;
  std::optional<Matrix> truth;  // p x N
  std::optional<Vector> truth_intercepts;
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  std::string generator_id;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
  Index time_points() const { return Y.cols(); }

  void validate() const {
    if (Y.rows() != X.rows()) throw Error(ErrorCode::DimensionMismatch, "X and Y row counts differ");
    if (Y.cols() != times.size()) throw Error(ErrorCode::DimensionMismatch, "Y columns differ from time count");
    if (truth && (truth->rows() != X.cols() || truth->cols() != Y.cols())) {
      throw Error(ErrorCode::DimensionMismatch, "truth must be p x N");
    }
    if (truth_intercepts && truth_intercepts->size() != Y.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "truth intercepts must have N entries");
    }
  }
};

inline Vector time_grid(Index N) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "time_grid needs N >= 2");
  Vector t(N);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(N - 1);
  for (Index r = 0; r < N; ++r) t(r) = static_cast<double>(r) * step;
  t(N - 1) = 2.0 * std::numbers::pi;
  return t;
}

inline Vector true_beta(int model, double t, Index p) {
  Vector b = Vector::Zero(p);
  if (model == 1) {
    if (p < 3) throw Error(ErrorCode::TooFewColumns, "model 1 needs p >= 3");
    b(0) = 0.45 * t;
    b(1) = 3.0 * std::sin(t);
    b(2) = 3.0 * std::cos(t - 3.0);
  } else if (model == 2) {
    if (p < 8) throw Error(ErrorCode::TooFewColumns, "model 2 needs p >= 8");
    for (int k = 0; k < 4; ++k) {
      b(2 * k) = 0.85 + 0.5 * std::sin(t - k);
      b(2 * k + 1) = 0.85 + 0.5 * std::cos(t - k);
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "model must be 1 or 2");
  }
  return b;
}

/// p x N matrix with columns beta(t_r).
inline Matrix truth_matrix(int model, const Vector& times, Index p) {
  Matrix B(p, times.size());
  for (Index r = 0; r < times.size(); ++r) B.col(r) = true_beta(model, times(r), p);
  return B;
}

/// Sigma_{jk} = rho^{|j-k|}.
inline Matrix ar1_covariance(Index p, double rho) {
  Matrix S(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k < p; ++k) S(j, k) = std::pow(rho, static_cast<double>(std::abs(j - k)));
  }
  return S;
}

/// Rows i.i.d. N(0, AR(rho)) via x_1 = z_1, x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j.
inline Matrix gen_design(Index n, Index p, double rho, Rng& rng) {
  if (n < 2 || p < 1) throw Error(ErrorCode::InvalidArgument, "gen_design needs n >= 2, p >= 1");
  if (!(rho > -1.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (-1, 1)");
  const double innovation = std::sqrt(1.0 - rho * rho);
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i) {
    double prev = rng.normal();
    X(i, 0) = prev;
    for (Index j = 1; j < p; ++j) {
      prev = rho * prev + innovation * rng.normal();
      X(i, j) = prev;
    }
  }
  return X;
}

inline constexpr double kDesignCorrelation = 0.5;

inline TimeCourseDataset simulate_dataset(int model, Index n, Index p, double sigma, Index N,
                                          std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  TimeCourseDataset d;
  d.times = time_grid(N);
  d.truth = truth_matrix(model, d.times, p);
  d.truth_intercepts = Vector::Zero(N);
  d.sigma = sigma;
  d.seed = seed;
  d.generator_id = std::string(kGeneratorId);

  Rng rng(seed);
  d.X = gen_design(n, p, kDesignCorrelation, rng);
  d.Y = d.X * *d.truth;
  for (Index r = 0; r < N; ++r) {
    for (Index i = 0; i < n; ++i) d.Y(i, r) += sigma * rng.normal();
  }
  return d;
}

/// (1/N) sum_r beta(t_r)' Sigma beta(t_r) / sigma^2.
inline double snr(const Matrix& truth, const Matrix& Sigma, double sigma) {
  if (Sigma.rows() != truth.rows() || Sigma.cols() != truth.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Sigma must be p x p");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
  if (truth.cols() == 0) return 0.0;
  double total = 0.0;
  for (Index r = 0; r < truth.cols(); ++r) total += truth.col(r).dot(Sigma * truth.col(r));
  return total / static_cast<double>(truth.cols()) / (sigma * sigma);
}

}  // namespace smoothlasso
