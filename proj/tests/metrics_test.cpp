#include "smoothlasso/metrics.hpp"

#include <gtest/gtest.h>

#include "smoothlasso/simulation.hpp"
#include "test_util.hpp"

namespace smoothlasso {
namespace {

TimeCourseFit make_fit(const std::vector<Vector>& coefs, const std::vector<double>& intercepts, Vector scales,
                       Vector centers) {
  TimeCourseFit f;
  for (std::size_t r = 0; r < coefs.size(); ++r) {
    LassoFit l;
    l.coefficients = coefs[r];
    l.intercept = intercepts[r];
    l.refresh_active_set();
    f.fits.push_back(l);
  }
  f.column_scales = std::move(scales);
  f.column_centers = std::move(centers);
  return f;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

TEST(Metrics, Examples) {
  const TimeCourseFit fit =
      make_fit({vec({1.0, 0.0, 2.0}), vec({0.0, 0.0, 0.0})}, {0.0, 0.0}, Vector::Ones(3), Vector::Zero(3));
  Matrix truth(3, 2);
  truth << 1.0, 1.0,  //
      0.0, 0.0,       //
      1.0, 0.0;
  // ||(0,0,1)||^2 = 1 and ||(-1,0,0)||^2 = 1.
  EXPECT_DOUBLE_EQ(mse_beta(fit, truth), 1.0);
  EXPECT_DOUBLE_EQ(model_size(fit), 1.0);
  EXPECT_DOUBLE_EQ(false_positives(fit, truth), 0.0);

  const TimeCourseFit noisy = make_fit({vec({1.0, 0.5, 0.0}), vec({0.0, 0.3, 0.2})}, {0.0, 0.0}, Vector::Ones(3),
                                       Vector::Zero(3));
  EXPECT_DOUBLE_EQ(model_size(noisy), 2.0);
  // t0: x2 nonzero with truth 0 -> 1; t1: x2, x3 nonzero with truth 0 -> 2.
  EXPECT_DOUBLE_EQ(false_positives(noisy, truth), 1.5);
}

TEST(Metrics, IdentityCovarianceDecomposition) {
  testing::Gen g(71);
  for (int rep = 0; rep < 20; ++rep) {
    const Index p = 5, N = 4;
    std::vector<Vector> coefs;
    std::vector<double> b0;
    for (Index r = 0; r < N; ++r) {
      coefs.push_back(g.normal_vector(p));
      b0.push_back(g.normal());
    }
    const TimeCourseFit fit = make_fit(coefs, b0, Vector::Ones(p), Vector::Zero(p));
    const Matrix truth = g.normal_matrix(p, N);
    const Vector truth_b0 = g.normal_vector(N);
    double intercept_term = 0.0;
    for (Index r = 0; r < N; ++r) intercept_term += std::pow(b0[r] - truth_b0(r), 2);
    intercept_term /= N;
    EXPECT_NEAR(mse_pred(fit, truth, truth_b0, Matrix::Identity(p, p)), mse_beta(fit, truth) + intercept_term, 1e-12);
  }
}

TEST(Metrics, RawScaleCoefficients) {
  // Standardized coefficient 2 with scale 4 is 0.5 on the raw scale.
  const TimeCourseFit fit = make_fit({vec({2.0})}, {3.0}, vec({4.0}), vec({1.0}));
  Matrix truth(1, 1);
  truth << 0.5;
  EXPECT_DOUBLE_EQ(mse_beta(fit, truth), 0.0);
  // Raw intercept 3 - 0.5 * 1 = 2.5.
  EXPECT_DOUBLE_EQ(mse_pred(fit, truth, vec({2.5}), Matrix::Identity(1, 1)), 0.0);
}

TEST(Metrics, MsePredMatchesMonteCarloPredictionError) {
  testing::Gen g(72);
  const Index p = 4;
  const TimeCourseFit fit = make_fit({g.normal_vector(p)}, {0.3}, Vector::Ones(p), Vector::Zero(p));
  const Matrix truth = g.normal_matrix(p, 1);
  const Matrix Sigma = ar1_covariance(p, 0.5);
  Rng rng(5);
  const Matrix X = gen_design(200000, p, 0.5, rng);
  const Vector diff = (X * (fit.fits[0].coefficients - truth.col(0))).array() + 0.3;
  const double mc = diff.squaredNorm() / 200000.0;
  EXPECT_NEAR(mse_pred(fit, truth, Vector::Zero(1), Sigma) / mc, 1.0, 0.02);
}

TEST(Metrics, DimensionChecks) {
  const TimeCourseFit fit = make_fit({vec({1.0, 2.0})}, {0.0}, Vector::Ones(2), Vector::Zero(2));
  EXPECT_THROW(mse_beta(fit, Matrix::Zero(3, 1)), Error);
  EXPECT_THROW(mse_beta(fit, Matrix::Zero(2, 2)), Error);
  EXPECT_THROW(mse_pred(fit, Matrix::Zero(2, 1), Vector::Zero(1), Matrix::Identity(3, 3)), Error);
}

TEST(Aggregate, MeanAndSampleSd) {
  std::vector<RunMetrics> runs{{1, 2, 3, 0}, {2, 2, 4, 1}, {3, 2, 5, 2}};
  const AggregateMetrics a = aggregate_runs(runs);
  EXPECT_EQ(a.runs, 3u);
  EXPECT_DOUBLE_EQ(a.mse_beta.mean, 2.0);
  EXPECT_DOUBLE_EQ(*a.mse_beta.sd, 1.0);
  EXPECT_DOUBLE_EQ(*a.mse_pred.sd, 0.0);
  EXPECT_DOUBLE_EQ(a.msize.mean, 4.0);
  EXPECT_DOUBLE_EQ(a.fp.mean, 1.0);

  const AggregateMetrics one = aggregate_runs({{1.5, 2, 3, 0}});
  EXPECT_DOUBLE_EQ(one.mse_beta.mean, 1.5);
  EXPECT_FALSE(one.mse_beta.sd.has_value());

  try {
    aggregate_runs({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyList);
  }
}

}  // namespace
}  // namespace smoothlasso
