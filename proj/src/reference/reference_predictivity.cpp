#include "xalign/reference.hpp"

#include "xalign/errors.hpp"
#include "xalign/predictivity.hpp"

#include <cmath>

namespace xalign::reference {

namespace {

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;
};

Standardizer fit(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Standardizer s;
  const double n = static_cast<double>(rows.size());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (auto r : rows) sum += m(r, j);
    const double mu = sum / n;
    double ss = 0.0;
    for (auto r : rows) ss += (m(r, j) - mu) * (m(r, j) - mu);
    s.mean.push_back(mu);
    s.sd.push_back(std::sqrt(ss / n));
  }
  return s;
}

Eigen::MatrixXd apply(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows, const Standardizer& s) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto js = static_cast<std::size_t>(j);
      out(static_cast<Eigen::Index>(i), j) = s.sd[js] < 1e-12 ? 0.0 : (m(rows[i], j) - s.mean[js]) / s.sd[js];
    }
  }
  return out;
}

double mean_column_r(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& actual) {
  const Eigen::Index n = pred.rows();
  double total = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    double ma = 0.0, mb = 0.0, amax = 0.0, bmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      ma += pred(i, j);
      mb += actual(i, j);
      amax = std::max(amax, std::abs(pred(i, j)));
      bmax = std::max(bmax, std::abs(actual(i, j)));
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0, spread_a = 0.0, spread_b = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = pred(i, j) - ma;
      const double b = actual(i, j) - mb;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
      spread_a = std::max(spread_a, std::abs(a));
      spread_b = std::max(spread_b, std::abs(b));
    }
    const double tol = 64.0 * 2.220446049250313e-16;
    if (spread_a <= tol * amax || spread_b <= tol * bmax) continue;  // r = 0
    total += sab / std::sqrt(saa * sbb);
  }
  return total / static_cast<double>(pred.cols());
}

double fit_and_score(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& train,
                     const std::vector<Eigen::Index>& eval, double lambda) {
  const auto xs = fit(x, train);
  const auto ys = fit(y, train);
  const Eigen::MatrixXd w = normal_equations<double>(apply(x, train, xs), apply(y, train, ys), lambda);
  return mean_column_r(apply(x, eval, xs) * w, apply(y, eval, ys));
}

}  // namespace

PredictivityOutcome linear_predictivity(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                        const FoldPlan& folds, std::span<const double> lambda_grid,
                                        std::uint64_t seed) {
  const int k = folds.n_folds;
  PredictivityOutcome out;
  for (int f = 0; f < k; ++f) {
    const auto train = folds.train_rows(f);
    const auto test = folds.test_rows(f);

    std::vector<int> sub_groups;
    if (folds.grouped()) {
      for (auto r : train) sub_groups.push_back(folds.groups[static_cast<std::size_t>(r)]);
    }
    const FoldPlan inner = make_folds(train.size(), k, inner_fold_seed(seed, f), sub_groups);

    double best_r = 0.0;
    double best_lambda = 0.0;
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) {
        std::vector<Eigen::Index> itrain, ival;
        for (std::size_t j = 0; j < train.size(); ++j) {
          (inner.assignments[j] == i ? ival : itrain).push_back(train[j]);
        }
        acc += fit_and_score(x, y, itrain, ival, lambda_grid[l]);
      }
      if (l == 0 || acc > best_r || (acc == best_r && lambda_grid[l] < best_lambda)) {
        best_r = acc;
        best_lambda = lambda_grid[l];
      }
    }
    const double r = fit_and_score(x, y, train, test, best_lambda);
    out.per_fold_scores.push_back(r);
    out.per_fold_lambda.push_back(best_lambda);
    out.score += r;
  }
  out.score /= k;
  return out;
}

}  // namespace xalign::reference
