#pragma once

// Kernel weights over a time grid (or any pseudo-distance) and the smoothed
// response ytilde(t_r) = sum_s w(t_s, t_r) y(t_s).

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "smoothlasso/error.hpp"
#include "smoothlasso/solver.hpp"

namespace smoothlasso {

enum class Kernel { Gaussian, Epanechnikov, Uniform };

inline std::string_view kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Gaussian: return "gaussian";
    case Kernel::Epanechnikov: return "epanechnikov";
    case Kernel::Uniform: return "uniform";
  }
  return "gaussian";
}

inline Kernel parse_kernel(std::string_view name) {
  if (name == "gaussian") return Kernel::Gaussian;
  if (name == "epanechnikov") return Kernel::Epanechnikov;
  if (name == "uniform") return Kernel::Uniform;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

inline double kernel_eval(Kernel k, double u) {
  switch (k) {
    case Kernel::Gaussian:
      return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    case Kernel::Epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case Kernel::Uniform:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
  }
  return 0.0;
}

struct WeightVector {
  Vector weights;
  Index target_index = 0;
  /// All neighbor weights vanished; the result fell back to the point mass.
  bool degenerate = false;
  /// Several zero-distance entries shared the mass at h = 0.
  bool ambiguous = false;
};

/// Weights proportional to K(d_s / h). h = 0 puts all mass on the zero-distance entries.
inline WeightVector pseudo_distance_weights(const Vector& distances, double h, Kernel kernel) {
  const Index N = distances.size();
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "empty distance vector");
  if (!(h >= 0.0) || std::isinf(h)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be finite and >= 0");
  Index target = -1;
  Index zeros = 0;
  for (Index s = 0; s < N; ++s) {
    if (!(distances(s) >= 0.0)) throw Error(ErrorCode::InvalidArgument, "distances must be >= 0");
    if (distances(s) == 0.0) {
      if (target < 0) target = s;
      ++zeros;
    }
  }
  if (target < 0) throw Error(ErrorCode::InvalidArgument, "no zero-distance target entry");

  WeightVector w;
  w.target_index = target;
  const auto point_mass = [&] {
    w.weights = Vector::Zero(N);
    for (Index s = 0; s < N; ++s) {
      if (distances(s) == 0.0) w.weights(s) = 1.0 / static_cast<double>(zeros);
    }
    w.ambiguous = zeros > 1;
  };
  if (h == 0.0) {
    point_mass();
    return w;
  }
  w.weights.resize(N);
  for (Index s = 0; s < N; ++s) w.weights(s) = kernel_eval(kernel, distances(s) / h);
  const double total = w.weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    point_mass();
    w.degenerate = true;
    return w;
  }
  w.weights /= total;
  return w;
}

/// w(t_s, t_r) proportional to K((t_s - t_r)/h); boundary points are handled by
/// renormalization only.
inline WeightVector smoothing_weights(const Vector& times, Index r, double h, Kernel kernel) {
  const Index N = times.size();
  if (r < 0 || r >= N) throw Error(ErrorCode::InvalidArgument, "target index out of range");
  for (Index s = 1; s < N; ++s) {
    if (!(times(s) > times(s - 1))) {
      throw Error(ErrorCode::InvalidArgument, "times must be strictly increasing");
    }
  }
  Vector d(N);
  for (Index s = 0; s < N; ++s) d(s) = std::abs(times(s) - times(r));
  return pseudo_distance_weights(d, h, kernel);
}

inline Vector smooth_response(const Matrix& Y, const WeightVector& w) {
  if (Y.cols() != w.weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "response columns differ from weight length");
  }
  // A point mass returns the column itself, bit for bit.
  if (w.weights(w.target_index) == 1.0) return Y.col(w.target_index);
  Vector out = Vector::Zero(Y.rows());
  for (Index s = 0; s < Y.cols(); ++s) {
    if (w.weights(s) != 0.0) out.noalias() += w.weights(s) * Y.col(s);
  }
  return out;
}

}  // namespace smoothlasso
