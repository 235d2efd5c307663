#include "xalign/cka.hpp"

#include "xalign/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xalign {

namespace {

Eigen::MatrixXd centered(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const double scale = x.cwiseAbs().maxCoeff();
  if (c.cwiseAbs().maxCoeff() <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
    throw NumericError("degenerate representation: input is constant across items");
  }
  return c;
}

void check_shapes(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.rows() != y.rows()) throw ArgumentError("cka: inputs have different item counts");
  if (x.rows() < 3) throw ArgumentError("cka: need at least 3 items");
  if (!x.allFinite() || !y.allFinite()) throw NumericError("cka: non-finite input");
}

double finish(double xy, double xx, double yy) {
  if (!(xx > 0.0) || !(yy > 0.0)) throw NumericError("degenerate representation: zero self-HSIC");
  return std::clamp(xy / std::sqrt(xx * yy), 0.0, 1.0);
}

}  // namespace

double cka_linear_features(const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const Eigen::Ref<const Eigen::MatrixXd>& y) {
  check_shapes(x, y);
  const Eigen::MatrixXd xc = centered(x);
  const Eigen::MatrixXd yc = centered(y);
  // The 1/N^2 factors cancel in the ratio.
  const double xy = (xc.transpose() * yc).squaredNorm();
  const double xx = (xc.transpose() * xc).squaredNorm();
  const double yy = (yc.transpose() * yc).squaredNorm();
  return finish(xy, xx, yy);
}

double cka_linear_gram(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& y) {
  check_shapes(x, y);
  const Eigen::MatrixXd xc = centered(x);
  const Eigen::MatrixXd yc = centered(y);
  // Xc Xc^T equals H K H for K = X X^T.
  const Eigen::MatrixXd k = xc * xc.transpose();
  const Eigen::MatrixXd l = yc * yc.transpose();
  return finish(k.cwiseProduct(l).sum(), k.squaredNorm(), l.squaredNorm());
}

double cka_linear(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.cols() < x.rows() && y.cols() < y.rows()) return cka_linear_features(x, y);
  return cka_linear_gram(x, y);
}

}  // namespace xalign
