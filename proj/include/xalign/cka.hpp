#pragma once

#include <Eigen/Dense>

namespace xalign {

/// Linear CKA with the biased HSIC estimator, HSIC(K, L) = tr(HKH HLH) / N^2.
///
/// Uses ||Xc^T Yc||_F^2 when both feature counts are below N and the centered
/// Gram matrices otherwise. Throws NumericError("degenerate representation")
/// when either input is constant across rows.
double cka_linear(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y);

double cka_linear_features(const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const Eigen::Ref<const Eigen::MatrixXd>& y);
double cka_linear_gram(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& y);

}  // namespace xalign
