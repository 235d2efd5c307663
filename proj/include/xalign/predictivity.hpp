#pragma once

#include "xalign/folds.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xalign {

enum class Metric { linear_predictivity, cka };
/// xy: predict the y-side representation from the x side; yx: the reverse.
enum class Direction { xy, yx };

std::string_view to_string(Metric m);
std::string_view to_string(Direction d);
Metric parse_metric(std::string_view s);
Direction parse_direction(std::string_view s);

struct AlignmentResult {
  Direction direction = Direction::xy;
  Metric metric = Metric::linear_predictivity;
  double score = 0.0;
  // Linear predictivity only; empty for CKA.
  std::vector<double> per_fold_scores;
  std::vector<double> per_fold_lambda;
  Eigen::Index n_items = 0;
  Eigen::Index d_source = 0;
  Eigen::Index d_target = 0;
};

/// {1e-8, 1e-7, ..., 1e8}.
std::vector<double> default_lambda_grid();

/// "default", "logspace:LO:HI:COUNT" (base-10 exponents) or "a,b,c".
std::vector<double> parse_lambda_grid(std::string_view spec);

/// Seed of the inner fold plan used inside outer fold `outer_fold`.
std::uint64_t inner_fold_seed(std::uint64_t seed, int outer_fold);

/// Train/evaluation row sets of the nested cross-validation.
///
/// For each outer fold f there are `inner` splits of the outer training rows
/// (rows are global indices) followed by the outer split itself.
struct NestedSplits {
  struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> eval;
  };
  int outer = 0;
  int inner = 0;
  std::vector<Split> splits;  // outer * (inner + 1), outer-major

  const Split& inner_split(int f, int i) const { return splits[static_cast<std::size_t>(f * (inner + 1) + i)]; }
  const Split& outer_split(int f) const { return splits[static_cast<std::size_t>(f * (inner + 1) + inner)]; }
};

/// Builds the nested splits; inner plans are grouped by the outer plan's
/// groups when present. Throws ArgumentError if any evaluation set would have
/// fewer than 3 rows.
NestedSplits make_nested_splits(const FoldPlan& folds, std::uint64_t seed);

/// Ridge linear predictivity X -> Y with nested cross-validation.
///
/// Per outer fold: z-score on the training rows, choose lambda by inner
/// cross-validation (mean Pearson r, ties to the smaller lambda), refit on the
/// whole training split and score the held-out rows. The score is the mean
/// of the outer-fold scores.
AlignmentResult linear_predictivity(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    const Eigen::Ref<const Eigen::MatrixXd>& y, const FoldPlan& folds,
                                    std::span<const double> lambda_grid, std::uint64_t seed);

/// All-pairs linear predictivity from each predictor to each target under one
/// shared fold plan. Each predictor's SVDs are computed once per split and
/// reused for every target; (target, fold) tasks run in parallel.
/// Result is indexed [predictor][target].
std::vector<std::vector<AlignmentResult>> linear_predictivity_all_pairs(
    std::span<const Eigen::MatrixXd* const> predictors, std::span<const Eigen::MatrixXd* const> targets,
    const FoldPlan& folds, std::span<const double> lambda_grid, std::uint64_t seed);

AlignmentResult cka_result(const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const Eigen::Ref<const Eigen::MatrixXd>& y, Direction direction);

}  // namespace xalign
