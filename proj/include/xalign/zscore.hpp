#pragma once

#include <Eigen/Dense>

namespace xalign {

inline constexpr double kStdFloor = 1e-12;

/// Per-column mean and population standard deviation.
struct ZScoreStats {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;
};

ZScoreStats zscore_fit(const Eigen::Ref<const Eigen::MatrixXd>& x);

/// (x - mean) / std column-wise; columns whose std is below kStdFloor map to 0.
Eigen::MatrixXd zscore_apply(const Eigen::Ref<const Eigen::MatrixXd>& x, const ZScoreStats& stats);

}  // namespace xalign
