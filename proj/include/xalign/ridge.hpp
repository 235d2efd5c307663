#pragma once

#include "xalign/zscore.hpp"

#include <Eigen/Dense>

namespace xalign {

/// Solution of min_W ||XW - Y||^2 + lambda ||W||_F^2 (no intercept).
struct RidgeFit {
  Eigen::MatrixXd weights;  // d_X x d_Y
  double lambda = 0.0;
  // Filled by fit_standardized; empty when the caller z-scored the inputs.
  ZScoreStats x_stats;
  ZScoreStats y_stats;
};

/// Thin SVD of a design matrix, reused for every ridge penalty.
///
/// With X = U S V^T, W(lambda) = V diag(s / (s^2 + lambda)) U^T Y. Singular
/// values below max(n, d) * eps * s_max are treated as exact zeros.
class RidgePath {
 public:
  explicit RidgePath(const Eigen::Ref<const Eigen::MatrixXd>& x);

  Eigen::MatrixXd weights(const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda) const;

  /// Per-component shrinkage s / (s^2 + lambda).
  Eigen::VectorXd shrinkage(double lambda) const;

  const Eigen::MatrixXd& u() const { return u_; }
  const Eigen::MatrixXd& v() const { return v_; }
  const Eigen::VectorXd& singular_values() const { return s_; }
  Eigen::Index rank() const { return s_.size(); }

 private:
  Eigen::MatrixXd u_;
  Eigen::VectorXd s_;
  Eigen::MatrixXd v_;
};

/// Ridge weights for already z-scored inputs.
RidgeFit ridge_solve(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda);

/// Z-scores both sides with their own statistics, then solves.
RidgeFit fit_standardized(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda);

/// Predictions in the z-scored target space for raw inputs.
Eigen::MatrixXd predict(const RidgeFit& fit, const Eigen::Ref<const Eigen::MatrixXd>& x);

}  // namespace xalign
