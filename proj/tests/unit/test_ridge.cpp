#include "oracles.hpp"
#include "test_util.hpp"
#include "xalign/errors.hpp"
#include "xalign/predictivity.hpp"
#include "xalign/reference.hpp"
#include "xalign/ridge.hpp"

#include <gtest/gtest.h>

using namespace xalign;

namespace {

double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

}  // namespace

TEST(Ridge, OrthonormalSelfPrediction) {
  const Eigen::MatrixXd q = testutil::random_orthogonal(12, 8);
  const auto fit = ridge_solve(q, q, 1e-8);
  EXPECT_LT((fit.weights - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ridge, HugePenaltyShrinksToZero) {
  const Eigen::MatrixXd x = testutil::gaussian(40, 6, 1);
  const Eigen::MatrixXd y = testutil::gaussian(40, 3, 2);
  EXPECT_LT(fit_standardized(x, y, 1e8).weights.norm(), 1e-4);
}

TEST(Ridge, MatchesNormalEquationsOnSmallExample) {
  const Eigen::MatrixXd x = testutil::gaussian(20, 4, 11);
  const Eigen::MatrixXd y = testutil::gaussian(20, 3, 12);
  const auto fit = ridge_solve(x, y, 1.0);
  EXPECT_LT(rel_frobenius(fit.weights, oracle::ridge_normal_equations(x, y, 1.0)), 1e-8);
}

TEST(Ridge, OracleEquivalenceOverRandomInstances) {
  std::mt19937_64 rng(2024);
  const auto grid = default_lambda_grid();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng() % 49);
    const auto d = static_cast<Eigen::Index>(1 + rng() % 10);
    const auto dy = static_cast<Eigen::Index>(1 + rng() % 5);
    const Eigen::MatrixXd x = testutil::gaussian(n, d, rng());
    const Eigen::MatrixXd y = testutil::gaussian(n, dy, rng());
    for (double lambda : grid) {
      worst = std::max(worst, rel_frobenius(ridge_solve(x, y, lambda).weights, oracle::ridge_normal_equations(x, y, lambda)));
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Ridge, ReferenceNormalEquationsAgreeWithOracle) {
  const Eigen::MatrixXd x = testutil::gaussian(15, 30, 5);  // wide: kernel form
  const Eigen::MatrixXd y = testutil::gaussian(15, 2, 6);
  for (double lambda : {1e-3, 1.0, 1e3}) {
    EXPECT_LT(rel_frobenius(reference::normal_equations<double>(x, y, lambda), oracle::ridge_normal_equations(x, y, lambda)), 1e-8);
  }
}

TEST(Ridge, MonotoneShrinkage) {
  const Eigen::MatrixXd x = testutil::gaussian(30, 8, 3);
  const Eigen::MatrixXd y = testutil::gaussian(30, 4, 4);
  const RidgePath path(x);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : default_lambda_grid()) {
    const double norm = path.weights(y, lambda).norm();
    EXPECT_LE(norm, prev * (1 + 1e-12));
    prev = norm;
  }
}

TEST(Ridge, RankDeficientDesign) {
  Eigen::MatrixXd x = testutil::gaussian(10, 4, 9);
  x.col(3) = x.col(0) + x.col(1);
  const Eigen::MatrixXd y = testutil::gaussian(10, 2, 10);
  const RidgePath path(x);
  EXPECT_EQ(path.rank(), 3);
  EXPECT_LT(rel_frobenius(path.weights(y, 0.5), oracle::ridge_normal_equations(x, y, 0.5)), 1e-8);
}

TEST(Ridge, Errors) {
  Eigen::MatrixXd x = testutil::gaussian(5, 2, 1);
  const Eigen::MatrixXd y = testutil::gaussian(5, 1, 2);
  EXPECT_THROW(ridge_solve(x, y, 0.0), ArgumentError);
  EXPECT_THROW(ridge_solve(x, testutil::gaussian(4, 1, 2), 1.0), ArgumentError);
  x(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ridge_solve(x, y, 1.0), NumericError);
}

TEST(Ridge, PredictUsesStoredStatistics) {
  const Eigen::MatrixXd x = testutil::gaussian(30, 3, 1) * 3.0;
  const Eigen::MatrixXd y = x * Eigen::MatrixXd::Identity(3, 3);
  const auto fit = fit_standardized(x, y, 1e-6);
  const Eigen::MatrixXd yhat = predict(fit, x);
  // Same data on both sides: predictions reproduce the z-scored targets.
  const Eigen::MatrixXd yz = (y.rowwise() - fit.y_stats.mean).array().rowwise() / fit.y_stats.std.array();
  EXPECT_LT((yhat - yz).cwiseAbs().maxCoeff(), 1e-5);
}
