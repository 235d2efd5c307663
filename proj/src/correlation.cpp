#include "xalign/correlation.hpp"

#include "xalign/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xalign {

namespace {

constexpr double kConstantTol = 64.0 * std::numeric_limits<double>::epsilon();

// Centers `col` in place; false if the column is constant up to rounding.
bool center(Eigen::VectorXd& col) {
  const double maxabs = col.cwiseAbs().maxCoeff();
  col.array() -= col.mean();
  return col.cwiseAbs().maxCoeff() > kConstantTol * maxabs;
}

}  // namespace

Eigen::VectorXd column_pearson(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
                               const Eigen::Ref<const Eigen::MatrixXd>& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw ArgumentError("pearson: shape mismatch (" + std::to_string(predicted.rows()) + "x" +
                        std::to_string(predicted.cols()) + " vs " + std::to_string(actual.rows()) +
                        "x" + std::to_string(actual.cols()) + ")");
  }
  if (predicted.rows() < 3) throw ArgumentError("pearson: need at least 3 rows");
  Eigen::VectorXd r(predicted.cols());
  Eigen::VectorXd a, b;
  for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
    a = predicted.col(j);
    b = actual.col(j);
    if (!center(a) || !center(b)) {
      r(j) = 0.0;
      continue;
    }
    const double v = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    r(j) = std::clamp(v, -1.0, 1.0);
  }
  return r;
}

double pearson_mean(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
                    const Eigen::Ref<const Eigen::MatrixXd>& actual) {
  const Eigen::VectorXd r = column_pearson(predicted, actual);
  return r.size() ? r.sum() / static_cast<double>(r.size()) : 0.0;
}

double cosine_score(const Eigen::Ref<const Eigen::VectorXd>& u,
                    const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) throw ArgumentError("cosine: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw NumericError("cosine: zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

Eigen::RowVectorXd aggregate_mean(std::span<const Eigen::RowVectorXd> rows) {
  if (rows.empty()) throw ArgumentError("aggregate_mean: empty list");
  Eigen::RowVectorXd sum = rows.front();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != sum.size()) throw ArgumentError("aggregate_mean: dimension mismatch");
    sum += rows[i];
  }
  return sum / static_cast<double>(rows.size());
}

Eigen::RowVectorXd aggregate_mean(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows) {
  if (rows.empty()) throw ArgumentError("aggregate_mean: empty list");
  Eigen::RowVectorXd sum = m.row(rows.front());
  for (std::size_t i = 1; i < rows.size(); ++i) sum += m.row(rows[i]);
  return sum / static_cast<double>(rows.size());
}

}  // namespace xalign
