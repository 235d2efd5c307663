#pragma once

#include "xalign/folds.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

/// Serial reference implementations kept for testing and benchmarking.
///
/// These share only the fold plans with the production kernels. Ridge fits
/// solve the normal equations directly (one Cholesky-type solve per penalty),
/// z-scoring and Pearson correlation are written out as plain loops, and
/// nothing runs in parallel.
namespace xalign::reference {

struct PredictivityOutcome {
  double score = 0.0;
  std::vector<double> per_fold_scores;
  std::vector<double> per_fold_lambda;
};

PredictivityOutcome linear_predictivity(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                        const FoldPlan& folds, std::span<const double> lambda_grid,
                                        std::uint64_t seed);

/// (X^T X + lambda I)^{-1} X^T Y, or X^T (X X^T + lambda I)^{-1} Y when the
/// design is wide. Templated so tests can run it in extended precision.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> normal_equations(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y, Scalar lambda) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.cols() <= x.rows()) {
    Mat gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    return gram.ldlt().solve(x.transpose() * y);
  }
  Mat gram = x * x.transpose();
  gram.diagonal().array() += lambda;
  return x.transpose() * gram.ldlt().solve(y);
}

}  // namespace xalign::reference
