#pragma once

#include <Eigen/Dense>

#include <span>

namespace xalign {

/// Pearson r of each column pair. A column that is constant (to rounding) on
/// either side contributes r = 0.
Eigen::VectorXd column_pearson(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
                               const Eigen::Ref<const Eigen::MatrixXd>& actual);

/// Unweighted mean of column_pearson over all target columns.
double pearson_mean(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
                    const Eigen::Ref<const Eigen::MatrixXd>& actual);

double cosine_score(const Eigen::Ref<const Eigen::VectorXd>& u,
                    const Eigen::Ref<const Eigen::VectorXd>& v);

/// Arithmetic mean of the rows, in raw embedding space.
Eigen::RowVectorXd aggregate_mean(std::span<const Eigen::RowVectorXd> rows);

/// Mean of the given rows of `m` (summed in the listed order).
Eigen::RowVectorXd aggregate_mean(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows);

}  // namespace xalign
