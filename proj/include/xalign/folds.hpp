#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace xalign {

/// Seeded k-fold partition of `n_items` rows.
///
/// Without groups, fold sizes differ by at most one (the first n % k folds
/// take the extra row). With groups, every row of a group lands in the same
/// fold and groups are placed greedily onto the currently smallest fold.
struct FoldPlan {
  std::size_t n_items = 0;
  int n_folds = 0;
  std::uint64_t seed = 0;
  std::vector<int> assignments;
  std::vector<int> groups;  // empty when ungrouped

  std::vector<Eigen::Index> test_rows(int fold) const;
  std::vector<Eigen::Index> train_rows(int fold) const;
  std::vector<std::size_t> fold_sizes() const;
  bool grouped() const { return !groups.empty(); }
};

FoldPlan make_folds(std::size_t n_items, int n_folds, std::uint64_t seed);
FoldPlan make_folds(std::size_t n_items, int n_folds, std::uint64_t seed,
                    std::span<const int> groups);

/// Dense group ids (0, 1, ...) in order of first appearance.
std::vector<int> group_ids(std::span<const std::string> keys);

/// Fold plan for rows keyed by pair_key: grouped only if some key repeats.
FoldPlan make_folds_for_keys(std::span<const std::string> pair_keys, int n_folds,
                             std::uint64_t seed);

}  // namespace xalign
