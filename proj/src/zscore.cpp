#include "xalign/zscore.hpp"

#include "xalign/errors.hpp"

#include <cmath>

namespace xalign {

ZScoreStats zscore_fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() < 2) throw ArgumentError("z-scoring needs at least 2 rows");
  const double n = static_cast<double>(x.rows());
  ZScoreStats s;
  s.mean = x.colwise().sum() / n;
  s.std.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    s.std(j) = std::sqrt((x.col(j).array() - s.mean(j)).square().sum() / n);
  }
  return s;
}

Eigen::MatrixXd zscore_apply(const Eigen::Ref<const Eigen::MatrixXd>& x, const ZScoreStats& stats) {
  if (x.cols() != stats.mean.size()) throw ArgumentError("z-score statistics do not match column count");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (stats.std(j) < kStdFloor) {
      out.col(j).setZero();
    } else {
      out.col(j) = (x.col(j).array() - stats.mean(j)) / stats.std(j);
    }
  }
  return out;
}

}  // namespace xalign
