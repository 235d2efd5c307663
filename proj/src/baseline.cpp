#include "detail/curve.hpp"
#include "xalign/errors.hpp"
#include "xalign/experiments.hpp"
#include "xalign/rng.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace xalign {

std::vector<std::size_t> random_derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("a shuffled baseline needs at least two pair keys");
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  // Rejection sampling is uniform over derangements; about e draws expected.
  for (;;) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = perm[i] == i;
    if (!fixed) return perm;
  }
}

DatasetManifest shuffle_manifest(const DatasetManifest& manifest, std::span<const EmbeddingMatrix> x_side,
                                 std::span<const EmbeddingMatrix> y_side, std::uint64_t seed) {
  if (x_side.empty() || y_side.empty()) throw ArgumentError("shuffle needs matrices on both sides");
  const Modality y_mod = y_side.front().modality;
  if (x_side.front().modality == y_mod) {
    throw ArgumentError("a manifest shuffle needs one vision and one language side");
  }
  std::vector<EmbeddingMatrix> all(x_side.begin(), x_side.end());
  all.insert(all.end(), y_side.begin(), y_side.end());
  const auto entries = index_pairs(all, manifest);

  std::vector<std::string> keys;
  std::unordered_set<std::string> y_items;
  for (const auto& e : entries) {
    const auto& ys = y_mod == Modality::vision ? e.vision_items : e.language_items;
    const auto& xs = y_mod == Modality::vision ? e.language_items : e.vision_items;
    y_items.insert(ys.begin(), ys.end());
    if (!ys.empty() && !xs.empty()) keys.push_back(e.pair_key);
  }
  const auto perm = random_derangement(keys.size(), seed);
  std::unordered_map<std::string, std::string> remap;
  for (std::size_t i = 0; i < keys.size(); ++i) remap.emplace(keys[i], keys[perm[i]]);

  DatasetManifest out = manifest;
  for (auto& item : out.items) {
    if (!y_items.contains(item.item_id)) continue;
    auto it = remap.find(item.pair_key);
    if (it == remap.end()) continue;
    item.pair_key = it->second;
    // Partners now come from different pairs; their group labels would clash.
    item.group.reset();
  }
  return out;
}

namespace {

std::uint64_t shuffle_seed(std::uint64_t seed, int s) {
  return derive_seed(seed, 0xB000u + static_cast<std::uint64_t>(s));
}

// scores[direction] of one pair under a shuffled pairing.
std::vector<double> shuffled_align_scores(const PairData& p, const DatasetManifest* manifest, int s,
                                          const AnalysisOptions& options) {
  const std::uint64_t seed = shuffle_seed(options.seed, s);
  std::vector<AlignmentResult> r;
  if (manifest) {
    const EmbeddingMatrix xs[] = {p.x};
    const EmbeddingMatrix ys[] = {p.y};
    const DatasetManifest shuffled = shuffle_manifest(*manifest, xs, ys, seed);
    const AlignedRows a = align_pair(p.x, p.y, &shuffled, options.pairing);
    r = score_aligned(a.matrices[0].data, a.matrices[1].data, a.pair_keys, options);
  } else {
    const AlignedRows a = align_pair(p.x, p.y, nullptr, options.pairing);
    const auto perm = random_derangement(a.size(), seed);
    std::vector<Eigen::Index> rows(perm.begin(), perm.end());
    const Eigen::MatrixXd y = a.matrices[1].data(rows, Eigen::all);
    r = score_aligned(a.matrices[0].data, y, a.pair_keys, options);
  }
  std::vector<double> out;
  for (const auto& x : r) out.push_back(x.score);
  return out;
}

}  // namespace

BaselineReport compute_shuffled_baseline(std::span<const PairData> pairs, const DatasetManifest* manifest,
                                         ExperimentKind baseline_of, int shuffle_count,
                                         const AggregationOptions& aggregation, const AnalysisOptions& options) {
  if (shuffle_count < 1) throw ArgumentError("shuffle_count must be at least 1");
  if (pairs.empty()) throw ArgumentError("a shuffled baseline needs at least one model pair");
  const bool curve = baseline_of == ExperimentKind::aggregation_curve;
  if (curve && !manifest) throw ArgumentError("an aggregation baseline needs a manifest");
  if (!curve && baseline_of != ExperimentKind::align) {
    throw ArgumentError("shuffled baselines support align and aggregation_curve");
  }
  const std::size_t n_dir = options.directions.size();
  const std::size_t n_k = curve ? static_cast<std::size_t>(aggregation.k_max) : 1;

  // [pair][direction][k]
  std::vector<std::vector<std::vector<double>>> matched;
  std::vector<std::vector<std::vector<double>>> shuffled;
  for (const auto& p : pairs) {
    if (curve) {
      matched.push_back(detail::aggregation_pair_curve(p, *manifest, aggregation, options));
    } else {
      const AlignedRows a = align_pair(p.x, p.y, manifest, options.pairing);
      const auto r = score_aligned(a.matrices[0].data, a.matrices[1].data, a.pair_keys, options);
      std::vector<std::vector<double>> m(n_dir);
      for (std::size_t d = 0; d < n_dir; ++d) m[d] = {r[d].score};
      matched.push_back(std::move(m));
    }

    std::vector<std::vector<double>> acc(n_dir, std::vector<double>(n_k, 0.0));
    for (int s = 0; s < shuffle_count; ++s) {
      if (curve) {
        const EmbeddingMatrix xs[] = {p.x};
        const EmbeddingMatrix ys[] = {p.y};
        const DatasetManifest sm = shuffle_manifest(*manifest, xs, ys, shuffle_seed(options.seed, s));
        const auto c = detail::aggregation_pair_curve(p, sm, aggregation, options);
        for (std::size_t d = 0; d < n_dir; ++d) {
          for (std::size_t k = 0; k < n_k; ++k) acc[d][k] += c[d][k];
        }
      } else {
        const auto c = shuffled_align_scores(p, manifest, s, options);
        for (std::size_t d = 0; d < n_dir; ++d) acc[d][0] += c[d];
      }
    }
    for (auto& row : acc) {
      for (auto& v : row) v /= shuffle_count;
    }
    shuffled.push_back(std::move(acc));
  }

  BaselineReport report;
  report.baseline_of = baseline_of;
  for (std::size_t d = 0; d < n_dir; ++d) {
    for (std::size_t k = 0; k < n_k; ++k) {
      std::vector<double> mv;
      std::vector<double> sv;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        mv.push_back(matched[p][d][k]);
        sv.push_back(shuffled[p][d][k]);
        const std::string name = curve ? "k=" + std::to_string(k + 1) : std::string("matched-vs-shuffled");
        report.contrast.scores.push_back({pairs[p].name, name, "baseline", options.directions[d], mv.back(),
                                          sv.back(), 0, 0});
      }
      const int kk = static_cast<int>(k + 1);
      report.matched.push_back(detail::curve_point(kk, options.directions[d], std::move(mv)));
      report.shuffled.push_back(detail::curve_point(kk, options.directions[d], std::move(sv)));
    }
  }
  report.contrast.summaries = summarize_contrasts(report.contrast.scores);
  return report;
}

}  // namespace xalign
