#include "xalign/ridge.hpp"

#include "xalign/errors.hpp"

#include <algorithm>
#include <limits>

namespace xalign {

RidgePath::RidgePath(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (!x.allFinite()) throw NumericError("ridge design matrix contains non-finite values");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = s.size() ? s(0) * static_cast<double>(std::max(x.rows(), x.cols())) *
                                    std::numeric_limits<double>::epsilon()
                              : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  s_ = s.head(r);
  u_ = svd.matrixU().leftCols(r);
  v_ = svd.matrixV().leftCols(r);
}

Eigen::VectorXd RidgePath::shrinkage(double lambda) const {
  return s_.array() / (s_.array().square() + lambda);
}

Eigen::MatrixXd RidgePath::weights(const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda) const {
  if (y.rows() != u_.rows()) throw ArgumentError("ridge target row count does not match design");
  if (!(lambda > 0.0)) throw ArgumentError("ridge penalty must be positive");
  if (!y.allFinite()) throw NumericError("ridge targets contain non-finite values");
  const Eigen::MatrixXd uty = u_.transpose() * y;
  return v_ * (shrinkage(lambda).asDiagonal() * uty);
}

RidgeFit ridge_solve(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda) {
  if (x.rows() < 2) throw ArgumentError("ridge regression needs at least 2 rows");
  if (x.rows() != y.rows()) throw ArgumentError("ridge inputs have different row counts");
  if (!y.allFinite()) throw NumericError("ridge targets contain non-finite values");
  RidgeFit fit;
  fit.lambda = lambda;
  fit.weights = RidgePath(x).weights(y, lambda);
  return fit;
}

RidgeFit fit_standardized(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda) {
  auto xs = zscore_fit(x);
  auto ys = zscore_fit(y);
  RidgeFit fit = ridge_solve(zscore_apply(x, xs), zscore_apply(y, ys), lambda);
  fit.x_stats = std::move(xs);
  fit.y_stats = std::move(ys);
  return fit;
}

Eigen::MatrixXd predict(const RidgeFit& fit, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (fit.x_stats.mean.size() == 0) return x * fit.weights;
  return zscore_apply(x, fit.x_stats) * fit.weights;
}

}  // namespace xalign
