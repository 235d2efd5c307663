#include "detail/curve.hpp"
#include "xalign/cka.hpp"
#include "xalign/errors.hpp"
#include "xalign/experiments.hpp"

#include <unordered_map>

namespace xalign {

namespace {

std::string join_keys(const std::vector<std::string>& keys) {
  std::string out;
  for (std::size_t i = 0; i < keys.size() && i < 20; ++i) {
    if (i) out += ", ";
    out += keys[i];
  }
  if (keys.size() > 20) out += ", ... (" + std::to_string(keys.size()) + " total)";
  return out;
}

// scores[direction][k - 1] for one model pair.
std::vector<std::vector<double>> pair_curve(const PairData& p, const DatasetManifest& manifest,
                                            const AggregationOptions& agg, const AnalysisOptions& options) {
  if (p.x.modality == p.y.modality) {
    throw ArgumentError("aggregation needs a vision and a language side (pair " + p.name + ")");
  }
  const EmbeddingMatrix& aggregated = agg.side == Side::x ? p.x : p.y;
  const EmbeddingMatrix& fixed = agg.side == Side::x ? p.y : p.x;
  const EmbeddingMatrix both[] = {p.x, p.y};
  const auto entries = index_pairs(both, manifest);

  auto rows_of = [](const EmbeddingMatrix& m) {
    std::unordered_map<std::string_view, Eigen::Index> idx;
    for (std::size_t i = 0; i < m.item_ids.size(); ++i) idx.emplace(m.item_ids[i], static_cast<Eigen::Index>(i));
    return idx;
  };
  const auto agg_rows = rows_of(aggregated);
  const auto fixed_rows = rows_of(fixed);

  std::vector<std::string> keys;
  std::vector<Eigen::Index> fixed_pick;
  std::vector<std::vector<Eigen::Index>> agg_pick;  // per key, first k_max exemplars
  std::vector<std::string> deficient;
  for (const auto& e : entries) {
    const auto& a_items = aggregated.modality == Modality::vision ? e.vision_items : e.language_items;
    const auto& f_items = fixed.modality == Modality::vision ? e.vision_items : e.language_items;
    if (a_items.empty() || f_items.empty()) continue;
    if (a_items.size() < static_cast<std::size_t>(agg.k_max)) {
      deficient.push_back(e.pair_key);
      continue;
    }
    keys.push_back(e.pair_key);
    fixed_pick.push_back(fixed_rows.at(f_items.front()));
    std::vector<Eigen::Index> picks;
    for (int k = 0; k < agg.k_max; ++k) picks.push_back(agg_rows.at(a_items[static_cast<std::size_t>(k)]));
    agg_pick.push_back(std::move(picks));
  }
  if (!deficient.empty() && !agg.drop_deficient) {
    throw FormatError("pair_keys with fewer than " + std::to_string(agg.k_max) + " exemplars in " +
                      aggregated.model_id + ": " + join_keys(deficient));
  }
  if (keys.empty()) throw FormatError("no pair_key has enough exemplars to aggregate");

  const auto n = static_cast<Eigen::Index>(keys.size());
  const Eigen::MatrixXd fixed_m = fixed.data(fixed_pick, Eigen::all);
  std::vector<Eigen::MatrixXd> means(static_cast<std::size_t>(agg.k_max));
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, aggregated.cols());
  for (int k = 1; k <= agg.k_max; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(i) += aggregated.data.row(agg_pick[static_cast<std::size_t>(i)][static_cast<std::size_t>(k - 1)]);
    }
    means[static_cast<std::size_t>(k - 1)] = sum / static_cast<double>(k);
  }

  std::vector<std::vector<double>> out(options.directions.size(), std::vector<double>(means.size()));
  if (options.metric == Metric::cka) {
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double s = cka_linear(fixed_m, means[k]);
      for (auto& row : out) row[k] = s;
    }
    return out;
  }

  const FoldPlan plan = make_folds_for_keys(keys, options.folds, options.seed);
  std::vector<const Eigen::MatrixXd*> agg_ptrs;
  for (const auto& m : means) agg_ptrs.push_back(&m);
  const Eigen::MatrixXd* fixed_ptr[] = {&fixed_m};
  for (std::size_t d = 0; d < options.directions.size(); ++d) {
    // Does this direction predict the aggregated side from the fixed one?
    const bool predicts_aggregated = (options.directions[d] == Direction::xy) == (agg.side == Side::y);
    if (predicts_aggregated) {
      const auto r = linear_predictivity_all_pairs(fixed_ptr, agg_ptrs, plan, options.lambda_grid, options.seed);
      for (std::size_t k = 0; k < means.size(); ++k) out[d][k] = r[0][k].score;
    } else {
      const auto r = linear_predictivity_all_pairs(agg_ptrs, fixed_ptr, plan, options.lambda_grid, options.seed);
      for (std::size_t k = 0; k < means.size(); ++k) out[d][k] = r[k][0].score;
    }
  }
  return out;
}

}  // namespace

namespace detail {

std::vector<std::vector<double>> aggregation_pair_curve(const PairData& p, const DatasetManifest& manifest,
                                                        const AggregationOptions& agg,
                                                        const AnalysisOptions& options) {
  return pair_curve(p, manifest, agg, options);
}

}  // namespace detail

std::vector<CurvePoint> compute_aggregation_curve(std::span<const PairData> pairs, const DatasetManifest& manifest,
                                                  const AggregationOptions& aggregation,
                                                  const AnalysisOptions& options) {
  if (aggregation.k_max < 1) throw ArgumentError("k_max must be at least 1");
  if (pairs.empty()) throw ArgumentError("aggregation needs at least one model pair");
  std::vector<std::vector<std::vector<double>>> per_pair;  // [pair][direction][k]
  for (const auto& p : pairs) per_pair.push_back(pair_curve(p, manifest, aggregation, options));

  std::vector<CurvePoint> curve;
  for (std::size_t d = 0; d < options.directions.size(); ++d) {
    for (int k = 1; k <= aggregation.k_max; ++k) {
      std::vector<double> values;
      for (const auto& p : per_pair) values.push_back(p[d][static_cast<std::size_t>(k - 1)]);
      curve.push_back(detail::curve_point(k, options.directions[d], std::move(values)));
    }
  }
  return curve;
}

}  // namespace xalign
