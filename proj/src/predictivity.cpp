#include "xalign/predictivity.hpp"

#include "xalign/cka.hpp"
#include "xalign/correlation.hpp"
#include "xalign/errors.hpp"
#include "xalign/parallel.hpp"
#include "xalign/ridge.hpp"
#include "xalign/rng.hpp"
#include "xalign/zscore.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

namespace xalign {

std::string_view to_string(Metric m) {
  return m == Metric::linear_predictivity ? "linear_predictivity" : "cka";
}

std::string_view to_string(Direction d) { return d == Direction::xy ? "xy" : "yx"; }

Metric parse_metric(std::string_view s) {
  if (s == "linear_predictivity" || s == "linpred") return Metric::linear_predictivity;
  if (s == "cka") return Metric::cka;
  throw ArgumentError("unknown metric \"" + std::string(s) + "\"");
}

Direction parse_direction(std::string_view s) {
  if (s == "xy" || s == "x->y") return Direction::xy;
  if (s == "yx" || s == "y->x") return Direction::yx;
  throw ArgumentError("unknown direction \"" + std::string(s) + "\"");
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -8; e <= 8; ++e) grid.push_back(std::stod("1e" + std::to_string(e)));
  return grid;
}

std::vector<double> parse_lambda_grid(std::string_view spec) {
  std::vector<double> grid;
  const std::string text(spec);
  try {
    if (text.empty() || text == "default") {
      grid = default_lambda_grid();
    } else if (text.rfind("logspace:", 0) == 0) {
      std::istringstream in(text.substr(9));
      std::string lo_s, hi_s, n_s;
      std::getline(in, lo_s, ':');
      std::getline(in, hi_s, ':');
      std::getline(in, n_s, ':');
      const double lo = std::stod(lo_s);
      const double hi = std::stod(hi_s);
      const int n = std::stoi(n_s);
      if (n < 1) throw ArgumentError("logspace count must be positive");
      for (int i = 0; i < n; ++i) {
        const double e = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        const double rounded = std::round(e);
        grid.push_back(std::abs(e - rounded) < 1e-12 ? std::stod("1e" + std::to_string(static_cast<int>(rounded)))
                                                     : std::pow(10.0, e));
      }
    } else {
      std::istringstream in(text);
      std::string tok;
      while (std::getline(in, tok, ',')) grid.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw ArgumentError("cannot parse lambda grid \"" + text + "\"");
  }
  if (grid.empty()) throw ArgumentError("lambda grid is empty");
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ArgumentError("lambda grid values must be positive and finite");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::uint64_t inner_fold_seed(std::uint64_t seed, int outer_fold) {
  return derive_seed(seed, 0x1000 + static_cast<std::uint64_t>(outer_fold));
}

NestedSplits make_nested_splits(const FoldPlan& folds, std::uint64_t seed) {
  const int k = folds.n_folds;
  auto too_small = [&](std::size_t rows) {
    return ArgumentError("too few rows (" + std::to_string(folds.n_items) + ") for nested " +
                         std::to_string(k) + "-fold cross-validation: a held-out split would have " +
                         std::to_string(rows) + " rows (need 3); use a smaller fold count");
  };

  NestedSplits out;
  out.outer = k;
  out.inner = k;
  out.splits.reserve(static_cast<std::size_t>(k * (k + 1)));
  for (int f = 0; f < k; ++f) {
    auto train = folds.train_rows(f);
    auto test = folds.test_rows(f);
    if (test.size() < 3) throw too_small(test.size());
    if (train.size() < static_cast<std::size_t>(k)) throw too_small(train.size() / static_cast<std::size_t>(k));

    std::vector<int> sub_groups;
    if (folds.grouped()) {
      for (auto r : train) sub_groups.push_back(folds.groups[static_cast<std::size_t>(r)]);
    }
    FoldPlan inner;
    try {
      inner = make_folds(train.size(), k, inner_fold_seed(seed, f), sub_groups);
    } catch (const ArgumentError&) {
      throw too_small(0);
    }
    for (int i = 0; i < k; ++i) {
      NestedSplits::Split s;
      for (std::size_t j = 0; j < train.size(); ++j) {
        (inner.assignments[j] == i ? s.eval : s.train).push_back(train[j]);
      }
      if (s.eval.size() < 3) throw too_small(s.eval.size());
      if (s.train.size() < 2) throw too_small(s.train.size());
      out.splits.push_back(std::move(s));
    }
    out.splits.push_back({std::move(train), std::move(test)});
  }
  return out;
}

namespace {

// Factorization of one predictor on one split: eval predictions for target
// columns q = U^T Y_train are P diag(s / (s^2 + lambda)) q.
struct SplitBasis {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd p;
};

SplitBasis factorize(const Eigen::MatrixXd& x, const NestedSplits::Split& split) {
  const Eigen::MatrixXd x_train = x(split.train, Eigen::all);
  const auto stats = zscore_fit(x_train);
  const RidgePath path(zscore_apply(x_train, stats));
  SplitBasis b;
  b.u = path.u();
  b.s = path.singular_values();
  b.p = zscore_apply(x(split.eval, Eigen::all), stats) * path.v();
  return b;
}

struct PreparedTarget {
  Eigen::MatrixXd q;
  Eigen::MatrixXd y_eval;
};

PreparedTarget prepare(const SplitBasis& b, const Eigen::MatrixXd& y, const NestedSplits::Split& split) {
  const Eigen::MatrixXd y_train = y(split.train, Eigen::all);
  const auto stats = zscore_fit(y_train);
  PreparedTarget t;
  t.q.noalias() = b.u.transpose() * zscore_apply(y_train, stats);
  t.y_eval = zscore_apply(y(split.eval, Eigen::all), stats);
  return t;
}

double score_at(const SplitBasis& b, const PreparedTarget& t, double lambda, Eigen::MatrixXd& scaled,
                Eigen::MatrixXd& predicted) {
  const Eigen::VectorXd c = b.s.array() / (b.s.array().square() + lambda);
  scaled.noalias() = b.p * c.asDiagonal();
  predicted.noalias() = scaled * t.q;
  return pearson_mean(predicted, t.y_eval);
}

struct FoldOutcome {
  double score = 0.0;
  double lambda = 0.0;
};

FoldOutcome score_fold(std::span<const SplitBasis> bases, const NestedSplits& splits, int f,
                       const Eigen::MatrixXd& y, std::span<const double> grid) {
  Eigen::MatrixXd scaled, predicted;
  std::vector<double> acc(grid.size(), 0.0);
  for (int i = 0; i < splits.inner; ++i) {
    const std::size_t idx = static_cast<std::size_t>(f * (splits.inner + 1) + i);
    const auto t = prepare(bases[idx], y, splits.splits[idx]);
    for (std::size_t l = 0; l < grid.size(); ++l) acc[l] += score_at(bases[idx], t, grid[l], scaled, predicted);
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < grid.size(); ++l) {
    if (acc[l] > acc[best] || (acc[l] == acc[best] && grid[l] < grid[best])) best = l;
  }
  const std::size_t outer_idx = static_cast<std::size_t>(f * (splits.inner + 1) + splits.inner);
  const auto t = prepare(bases[outer_idx], y, splits.splits[outer_idx]);
  return {score_at(bases[outer_idx], t, grid[best], scaled, predicted), grid[best]};
}

class FirstError {
 public:
  void capture() {
    std::lock_guard lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("lambda grid is empty");
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ArgumentError("lambda grid values must be positive and finite");
  }
}

}  // namespace

std::vector<std::vector<AlignmentResult>> linear_predictivity_all_pairs(
    std::span<const Eigen::MatrixXd* const> predictors, std::span<const Eigen::MatrixXd* const> targets,
    const FoldPlan& folds, std::span<const double> lambda_grid, std::uint64_t seed) {
  check_grid(lambda_grid);
  for (const auto* m : predictors) {
    if (static_cast<std::size_t>(m->rows()) != folds.n_items) throw ArgumentError("predictor rows do not match the fold plan");
    if (!m->allFinite()) throw NumericError("predictor contains non-finite values");
  }
  for (const auto* m : targets) {
    if (static_cast<std::size_t>(m->rows()) != folds.n_items) throw ArgumentError("target rows do not match the fold plan");
    if (!m->allFinite()) throw NumericError("target contains non-finite values");
  }

  const NestedSplits splits = make_nested_splits(folds, seed);
  const int n_splits = static_cast<int>(splits.splits.size());
  const int n_targets = static_cast<int>(targets.size());
  const int n_tasks = n_targets * splits.outer;
  const int threads = thread_count();

  std::vector<std::vector<AlignmentResult>> results(predictors.size());
  for (std::size_t p = 0; p < predictors.size(); ++p) {
    const Eigen::MatrixXd& x = *predictors[p];
    std::vector<SplitBasis> bases(static_cast<std::size_t>(n_splits));
    FirstError error;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int s = 0; s < n_splits; ++s) {
      try {
        bases[static_cast<std::size_t>(s)] = factorize(x, splits.splits[static_cast<std::size_t>(s)]);
      } catch (...) {
        error.capture();
      }
    }
    error.rethrow();

    std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(n_tasks));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int task = 0; task < n_tasks; ++task) {
      try {
        const int t = task / splits.outer;
        const int f = task % splits.outer;
        outcomes[static_cast<std::size_t>(task)] = score_fold(bases, splits, f, *targets[static_cast<std::size_t>(t)], lambda_grid);
      } catch (...) {
        error.capture();
      }
    }
    error.rethrow();

    auto& row = results[p];
    row.reserve(targets.size());
    for (int t = 0; t < n_targets; ++t) {
      AlignmentResult r;
      r.metric = Metric::linear_predictivity;
      r.n_items = x.rows();
      r.d_source = x.cols();
      r.d_target = targets[static_cast<std::size_t>(t)]->cols();
      double sum = 0.0;
      for (int f = 0; f < splits.outer; ++f) {
        const auto& o = outcomes[static_cast<std::size_t>(t * splits.outer + f)];
        r.per_fold_scores.push_back(o.score);
        r.per_fold_lambda.push_back(o.lambda);
        sum += o.score;
      }
      r.score = sum / splits.outer;
      row.push_back(std::move(r));
    }
  }
  return results;
}

AlignmentResult linear_predictivity(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    const Eigen::Ref<const Eigen::MatrixXd>& y, const FoldPlan& folds,
                                    std::span<const double> lambda_grid, std::uint64_t seed) {
  const Eigen::MatrixXd xm = x;
  const Eigen::MatrixXd ym = y;
  const Eigen::MatrixXd* xs[] = {&xm};
  const Eigen::MatrixXd* ys[] = {&ym};
  return linear_predictivity_all_pairs(xs, ys, folds, lambda_grid, seed)[0][0];
}

AlignmentResult cka_result(const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const Eigen::Ref<const Eigen::MatrixXd>& y, Direction direction) {
  AlignmentResult r;
  r.direction = direction;
  r.metric = Metric::cka;
  r.score = cka_linear(x, y);
  r.n_items = x.rows();
  r.d_source = direction == Direction::xy ? x.cols() : y.cols();
  r.d_target = direction == Direction::xy ? y.cols() : x.cols();
  return r;
}

}  // namespace xalign
