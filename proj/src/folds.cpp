#include "xalign/folds.hpp"

#include "xalign/errors.hpp"
#include "xalign/rng.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace xalign {

namespace {

void check_counts(std::size_t n_items, int n_folds) {
  if (n_folds < 2) throw ArgumentError("fold count must be at least 2");
  if (n_items < static_cast<std::size_t>(n_folds)) {
    throw ArgumentError("cannot split " + std::to_string(n_items) + " items into " +
                        std::to_string(n_folds) + " folds");
  }
}

}  // namespace

std::vector<Eigen::Index> FoldPlan::test_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<Eigen::Index> FoldPlan::train_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n_folds), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

FoldPlan make_folds(std::size_t n_items, int n_folds, std::uint64_t seed) {
  check_counts(n_items, n_folds);
  std::vector<std::size_t> perm(n_items);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldPlan plan{n_items, n_folds, seed, std::vector<int>(n_items), {}};
  const std::size_t k = static_cast<std::size_t>(n_folds);
  const std::size_t base = n_items / k;
  const std::size_t extra = n_items % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) plan.assignments[perm[pos++]] = static_cast<int>(f);
  }
  return plan;
}

FoldPlan make_folds(std::size_t n_items, int n_folds, std::uint64_t seed,
                    std::span<const int> groups) {
  if (groups.empty()) return make_folds(n_items, n_folds, seed);
  check_counts(n_items, n_folds);
  if (groups.size() != n_items) throw ArgumentError("group list length does not match item count");

  // Compact the group ids so arbitrary labels are accepted.
  std::unordered_map<int, int> remap;
  std::vector<int> dense(n_items);
  std::vector<std::size_t> group_size;
  for (std::size_t i = 0; i < n_items; ++i) {
    auto [it, inserted] = remap.emplace(groups[i], static_cast<int>(group_size.size()));
    if (inserted) group_size.push_back(0);
    dense[i] = it->second;
    ++group_size[static_cast<std::size_t>(it->second)];
  }
  const std::size_t n_groups = group_size.size();
  if (n_groups < static_cast<std::size_t>(n_folds)) {
    throw ArgumentError("cannot split " + std::to_string(n_groups) + " groups into " +
                        std::to_string(n_folds) + " folds");
  }

  std::vector<std::size_t> order(n_groups);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  // Large groups first keeps the greedy fill close to balanced.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return group_size[a] > group_size[b]; });

  std::vector<std::size_t> load(static_cast<std::size_t>(n_folds), 0);
  std::vector<int> group_fold(n_groups, -1);
  for (std::size_t g : order) {
    const auto f = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    group_fold[g] = static_cast<int>(f);
    load[f] += group_size[g];
  }

  FoldPlan plan{n_items, n_folds, seed, std::vector<int>(n_items), dense};
  for (std::size_t i = 0; i < n_items; ++i) {
    plan.assignments[i] = group_fold[static_cast<std::size_t>(dense[i])];
  }
  return plan;
}

std::vector<int> group_ids(std::span<const std::string> keys) {
  std::unordered_map<std::string_view, int> ids;
  std::vector<int> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    auto [it, inserted] = ids.emplace(k, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

FoldPlan make_folds_for_keys(std::span<const std::string> pair_keys, int n_folds,
                             std::uint64_t seed) {
  const auto ids = group_ids(pair_keys);
  const int distinct = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  if (static_cast<std::size_t>(distinct) == pair_keys.size()) {
    return make_folds(pair_keys.size(), n_folds, seed);
  }
  return make_folds(pair_keys.size(), n_folds, seed, ids);
}

}  // namespace xalign
