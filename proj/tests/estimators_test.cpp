#include "smoothlasso/estimators.hpp"

#include <gtest/gtest.h>

#include "smoothlasso/simulation.hpp"
#include "test_util.hpp"

namespace smoothlasso {
namespace {

using testing::Gen;

Problem small_problem(std::uint64_t seed, Index n = 40, Index p = 6, Index N = 9) {
  return Problem::from(simulate_dataset(1, n, p, 1.0, N, seed));
}

StageParams params_for(int id, double lambda, double h = 0.0) {
  StageParams s;
  s.lambda = lambda;
  s.bandwidth = id >= 4 ? h : 0.0;
  if (id == 3 || id == 6 || id == 7) s.init_lambda = lambda * 0.5;
  if (id == 6) s.init_bandwidth = h;
  if (id == 5) s.init_bandwidth = h;
  if (id == 7) s.mid_lambda = lambda * 0.7;
  return s;
}

TEST(EstimatorSpec, Flags) {
  EXPECT_FALSE(EstimatorSpec{1}.smoothed());
  EXPECT_TRUE(EstimatorSpec{4}.smoothed());
  EXPECT_FALSE(EstimatorSpec{4}.adaptive());
  EXPECT_TRUE(EstimatorSpec{7}.adaptive());
  EXPECT_TRUE(EstimatorSpec{2}.ols_initialized());
  EXPECT_TRUE(EstimatorSpec{5}.ols_initialized());
  EXPECT_THROW(EstimatorSpec{8}.validate(), Error);
  EXPECT_THROW((EstimatorSpec{3, 0.0}).validate(), Error);
  EXPECT_EQ(estimator_label(4), "Smoothed Lasso");
}

TEST(AdaptiveWeights, Examples) {
  Vector b(3);
  b << 2.0, 0.0, -0.5;
  const Vector tau = adaptive_penalty_weights(b, 1.0);
  EXPECT_EQ(tau(0), 0.5);
  EXPECT_TRUE(std::isinf(tau(1)));
  EXPECT_EQ(tau(2), 2.0);
  EXPECT_EQ(adaptive_penalty_weights(b, 2.0)(2), 4.0);
  EXPECT_THROW(adaptive_penalty_weights(b, -1.0), Error);
}

TEST(AdaptiveLasso, UnitInitialIsPlainLasso) {
  Gen g(41);
  const DesignMatrix X = standardize_columns(g.normal_matrix(30, 5));
  const Vector y = X.values * g.normal_vector(5) + g.normal_vector(30);
  const double lambda = 0.2 * lambda_max(X, y);
  const LassoFit a = adaptive_lasso_fit(X, y, lambda, Vector::Ones(5), 1.0);
  const LassoFit l = lasso_fit(X, y, lambda);
  EXPECT_LE((a.coefficients - l.coefficients).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(AdaptiveLasso, MatchesWeightedPenaltyOracle) {
  Gen g(42);
  for (int rep = 0; rep < 40; ++rep) {
    const Index p = g.integer(1, 4);
    const DesignMatrix X = standardize_columns(g.correlated(20, p, 0.4));
    const Vector y = X.values * g.normal_vector(p) + g.normal_vector(20);
    Vector init = g.normal_vector(p);
    if (p > 1 && rep % 3 == 0) init(0) = 0.0;
    const double gamma = rep % 2 ? 1.0 : 2.0;
    const Vector tau = adaptive_penalty_weights(init, gamma);
    const double lambda = g.uniform(0.05, 1.0) * 2.0 * (X.values.transpose() * (y.array() - y.mean()).matrix()).cwiseAbs().maxCoeff();
    const LassoFit fit = adaptive_lasso_fit(X, y, lambda, init, gamma);
    const LassoFit oracle = lasso_bruteforce(X, y, lambda, tau);
    EXPECT_LE((fit.coefficients - oracle.coefficients).cwiseAbs().maxCoeff(), 1e-7 * (1.0 + oracle.coefficients.norm()));
    EXPECT_NEAR(fit.intercept, oracle.intercept, 1e-7 * (1.0 + std::abs(oracle.intercept)));
    EXPECT_LE(fit.objective, oracle.objective * (1.0 + 1e-10) + 1e-12);
  }
}

TEST(AdaptiveLasso, ZeroInitialStaysZero) {
  Gen g(43);
  for (int rep = 0; rep < 30; ++rep) {
    const DesignMatrix X = standardize_columns(g.normal_matrix(25, 8));
    const Vector y = X.values * Vector::Constant(8, 1.0) + g.normal_vector(25);
    Vector init = g.normal_vector(8);
    for (Index j = 0; j < 8; ++j)
      if (g.uniform(0, 1) < 0.4) init(j) = 0.0;
    const LassoFit fit = adaptive_lasso_fit(X, y, 0.5, init, 1.0);
    for (Index j = 0; j < 8; ++j) {
      if (init(j) == 0.0) {
        EXPECT_EQ(fit.coefficients(j), 0.0);
      }
    }
  }
}

TEST(AdaptiveLasso, AllZeroInitialGivesInterceptOnly) {
  Gen g(44);
  const DesignMatrix X = standardize_columns(g.normal_matrix(15, 4));
  const Vector y = g.normal_vector(15).array() + 3.0;
  const LassoFit fit = adaptive_lasso_fit(X, y, 1.0, Vector::Zero(4), 1.0);
  EXPECT_TRUE(fit.all_excluded);
  EXPECT_TRUE(fit.coefficients.isZero(0.0));
  EXPECT_DOUBLE_EQ(fit.intercept, y.mean());
  EXPECT_TRUE(fit.active_set.empty());
}

TEST(AdaptiveLasso, DimensionErrors) {
  Gen g(45);
  const DesignMatrix X = standardize_columns(g.normal_matrix(15, 4));
  EXPECT_THROW(adaptive_lasso_fit(X, g.normal_vector(15), 1.0, Vector::Ones(3), 1.0), Error);
  EXPECT_THROW(adaptive_lasso_fit(X, g.normal_vector(14), 1.0, Vector::Ones(4), 1.0), Error);
}

TEST(ValidateParams, MissingStages) {
  StageParams s;
  s.lambda = 1.0;
  EXPECT_NO_THROW(validate_params(EstimatorSpec{1}, s));
  EXPECT_THROW(validate_params(EstimatorSpec{3}, s), Error);
  s.bandwidth = 0.5;
  EXPECT_THROW(validate_params(EstimatorSpec{1}, s), Error);
  EXPECT_NO_THROW(validate_params(EstimatorSpec{4}, s));
  s.init_lambda = 0.3;
  EXPECT_THROW(validate_params(EstimatorSpec{6}, s), Error);
  s.init_bandwidth = 0.2;
  EXPECT_NO_THROW(validate_params(EstimatorSpec{6}, s));
  EXPECT_THROW(validate_params(EstimatorSpec{5}, s), Error);
  EXPECT_THROW(validate_params(EstimatorSpec{7}, s), Error);
  s.lambda = -1.0;
  EXPECT_THROW(validate_params(EstimatorSpec{4}, s), Error);
}

TEST(FitEstimator, LassoAtTimePoint) {
  const Problem prob = small_problem(46);
  for (Index r : {0, 4, 8}) {
    const LassoFit a = fit_estimator_at(EstimatorSpec{1}, prob, r, params_for(1, 2.0));
    const LassoFit b = lasso_fit(prob.X, prob.Y.col(r), 2.0);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_EQ(a.intercept, b.intercept);
  }
}

TEST(FitEstimator, ZeroBandwidthReproducesUnivariateBitForBit) {
  const Problem prob = small_problem(47);
  const std::pair<int, int> pairs[] = {{4, 1}, {5, 2}, {6, 3}};
  for (const auto& [smoothed, plain] : pairs) {
    for (Index r = 0; r < prob.time_points(); ++r) {
      const LassoFit a = fit_estimator_at(EstimatorSpec{smoothed}, prob, r, params_for(smoothed, 1.5, 0.0));
      const LassoFit b = fit_estimator_at(EstimatorSpec{plain}, prob, r, params_for(plain, 1.5));
      EXPECT_EQ(a.coefficients, b.coefficients) << smoothed << " vs " << plain;
      EXPECT_EQ(a.intercept, b.intercept);
    }
  }
}

TEST(FitEstimator, SmoothedLassoUsesSmoothedResponse) {
  const Problem prob = small_problem(48);
  const double h = 0.7;
  const Vector y = smooth_response(prob.Y, smoothing_weights(prob.times, 3, h, Kernel::Gaussian));
  const LassoFit a = fit_estimator_at(EstimatorSpec{4}, prob, 3, params_for(4, 1.0, h));
  const LassoFit b = lasso_fit(prob.X, y, 1.0);
  EXPECT_EQ(a.coefficients, b.coefficients);
}

TEST(FitEstimator, PipelinesComposeStages) {
  const Problem prob = small_problem(49);
  const Index r = 5;
  const double h = 0.9;
  // id 6: lasso on smoothed response (init h, init lambda), then adaptive on smoothed response (h).
  const StageParams s6 = params_for(6, 2.0, h);
  const Vector init6 = lasso_fit(prob.X, prob.response(r, h, Kernel::Gaussian), *s6.init_lambda).coefficients;
  const LassoFit ref6 = adaptive_lasso_fit(prob.X, prob.response(r, h, Kernel::Gaussian), s6.lambda, init6, 1.0);
  EXPECT_EQ(fit_estimator_at(EstimatorSpec{6}, prob, r, s6).coefficients, ref6.coefficients);

  // id 7: lasso, adaptive (mid), then adaptive on the smoothed response.
  const StageParams s7 = params_for(7, 2.0, h);
  const Vector first = lasso_fit(prob.X, prob.Y.col(r), *s7.init_lambda).coefficients;
  const Vector mid = adaptive_lasso_fit(prob.X, prob.Y.col(r), *s7.mid_lambda, first, 1.0).coefficients;
  const LassoFit ref7 = adaptive_lasso_fit(prob.X, prob.response(r, h, Kernel::Gaussian), s7.lambda, mid, 1.0);
  EXPECT_EQ(fit_estimator_at(EstimatorSpec{7}, prob, r, s7).coefficients, ref7.coefficients);

  // id 5: OLS on the smoothed response shares h.
  const StageParams s5 = params_for(5, 2.0, h);
  const Vector init5 = ols_fit(prob.X, prob.response(r, h, Kernel::Gaussian)).coefficients;
  const LassoFit ref5 = adaptive_lasso_fit(prob.X, prob.response(r, h, Kernel::Gaussian), s5.lambda, init5, 1.0);
  EXPECT_EQ(fit_estimator_at(EstimatorSpec{5}, prob, r, s5).coefficients, ref5.coefficients);
}

TEST(FitEstimator, OlsInitializedNeedsMoreRowsThanColumns) {
  const Problem prob = small_problem(50, 10, 12, 4);
  try {
    fit_estimator_at(EstimatorSpec{2}, prob, 0, params_for(2, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotApplicable);
  }
  EXPECT_NO_THROW(fit_estimator_at(EstimatorSpec{3}, prob, 0, params_for(3, 1.0)));
  EXPECT_THROW(fit_estimator_at(EstimatorSpec{1}, prob, 4, params_for(1, 1.0)), Error);
}

TEST(FitTimecourse, ParallelEqualsSerial) {
  const Problem prob = small_problem(51, 40, 6, 12);
  TunedParams t;
  for (Index r = 0; r < 12; ++r) t.per_time.push_back(params_for(7, 1.0 + 0.1 * r, 0.5));
  const TimeCourseFit a = fit_timecourse(EstimatorSpec{7}, prob, t, {}, 1);
  const TimeCourseFit b = fit_timecourse(EstimatorSpec{7}, prob, t, {}, 4);
  for (Index r = 0; r < 12; ++r) {
    EXPECT_EQ(a.fits[r].coefficients, b.fits[r].coefficients);
    EXPECT_EQ(a.fits[r].intercept, b.fits[r].intercept);
  }
}

TEST(FitTimecourse, RawScaleRegressionFunction) {
  const TimeCourseDataset d = simulate_dataset(1, 40, 5, 1.0, 6, 52);
  const Problem prob = Problem::from(d);
  TunedParams t;
  t.per_time.assign(6, params_for(1, 0.5));
  const TimeCourseFit fit = fit_timecourse(EstimatorSpec{1}, prob, t);
  for (Index r = 0; r < 6; ++r) {
    const Vector std_pred = (prob.X.values * fit.fits[r].coefficients).array() + fit.fits[r].intercept;
    const Vector raw_pred = (d.X * fit.raw_coefficients(r)).array() + fit.raw_intercept(r);
    EXPECT_LE((std_pred - raw_pred).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FitTimecourse, ErrorsCarryFirstCode) {
  const Problem prob = small_problem(53, 30, 4, 5);
  TunedParams short_list;
  short_list.per_time.assign(4, params_for(1, 1.0));
  EXPECT_THROW(fit_timecourse(EstimatorSpec{1}, prob, short_list), Error);
  TunedParams bad;
  bad.per_time.assign(5, params_for(1, 1.0));
  bad.per_time[2].lambda = -1.0;
  try {
    fit_timecourse(EstimatorSpec{1}, prob, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    EXPECT_NE(std::string(e.what()).find("t=2"), std::string::npos);
  }
}

}  // namespace
}  // namespace smoothlasso
