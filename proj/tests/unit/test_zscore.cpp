#include "test_util.hpp"
#include "xalign/errors.hpp"
#include "xalign/zscore.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace xalign;

TEST(ZScore, ColumnOneTwoThree) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const auto stats = zscore_fit(x);
  const double mean = (1.0 + 2.0 + 3.0) / 3.0;
  const double sd = std::sqrt(((1 - mean) * (1 - mean) + 0.0 + (3 - mean) * (3 - mean)) / 3.0);
  EXPECT_DOUBLE_EQ(stats.mean(0), 2.0);
  EXPECT_NEAR(stats.std(0), sd, 1e-15);
  EXPECT_NEAR(stats.std(0), 0.8165, 5e-5);
  const auto z = zscore_apply(x, stats);
  EXPECT_NEAR(z(0, 0), -1.2247, 5e-5);
  EXPECT_NEAR(z(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(z(2, 0), 1.2247, 5e-5);
  EXPECT_NEAR(z(2, 0), (3 - mean) / sd, 1e-15);
}

TEST(ZScore, ConstantColumnMapsToZeros) {
  Eigen::MatrixXd x(4, 2);
  x << 5, 1, 5, 2, 5, 3, 5, 4;
  const auto z = zscore_apply(x, zscore_fit(x));
  EXPECT_TRUE(z.col(0).isZero(0.0));
  EXPECT_GT(z.col(1).norm(), 0.0);
}

TEST(ZScore, FittingRowsHaveZeroMeanUnitVariance) {
  const Eigen::MatrixXd x = testutil::gaussian(37, 9, 3) * 4.0 + Eigen::MatrixXd::Constant(37, 9, 2.5);
  const auto z = zscore_apply(x, zscore_fit(x));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-10);
    EXPECT_NEAR(z.col(j).squaredNorm() / 37.0, 1.0, 1e-10);
  }
}

TEST(ZScore, ApplyUsesTrainingStatistics) {
  const Eigen::MatrixXd train = testutil::gaussian(20, 3, 1);
  const Eigen::MatrixXd test = testutil::gaussian(5, 3, 2);
  const auto stats = zscore_fit(train);
  const auto z = zscore_apply(test, stats);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(z(i, j), (test(i, j) - stats.mean(j)) / stats.std(j), 1e-14);
  }
}

TEST(ZScore, NeedsTwoRows) { EXPECT_THROW(zscore_fit(Eigen::MatrixXd::Ones(1, 3)), ArgumentError); }
