#include "xalign/errors.hpp"
#include "xalign/experiments.hpp"

#include <map>
#include <tuple>

namespace xalign {

namespace {

struct Subset {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  std::vector<std::string> keys;
};

Subset subset_by_group(const AlignedRows& a, const std::string& group) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.groups[i] && *a.groups[i] == group) rows.push_back(static_cast<Eigen::Index>(i));
  }
  Subset s;
  s.x = a.matrices[0].data(rows, Eigen::all);
  s.y = a.matrices[1].data(rows, Eigen::all);
  for (auto r : rows) s.keys.push_back(a.pair_keys[static_cast<std::size_t>(r)]);
  return s;
}

}  // namespace

ContrastReport compute_group_contrast(std::span<const ContrastPairData> pairs, const DatasetManifest* manifest,
                                      std::span<const ContrastSpec> contrasts, const AnalysisOptions& options) {
  ContrastReport report;
  for (const auto& p : pairs) {
    const AlignedRows original = align_pair(p.x, p.y, manifest, options.pairing);
    std::optional<std::vector<AlignmentResult>> original_scores;

    for (const auto& c : contrasts) {
      std::vector<AlignmentResult> a;
      std::vector<AlignmentResult> b;
      std::size_t n_a = 0;
      std::size_t n_b = 0;
      if (c.variant) {
        auto it = p.variants.find(*c.variant);
        if (it == p.variants.end()) {
          throw ArgumentError("pair " + p.name + " has no variant \"" + *c.variant + "\"");
        }
        const EmbeddingMatrix& vx = it->second.x ? *it->second.x : p.x;
        const EmbeddingMatrix& vy = it->second.y ? *it->second.y : p.y;
        const AlignedRows variant = align_pair(vx, vy, manifest, options.pairing);
        if (variant.pair_keys != original.pair_keys) {
          throw FormatError("variant \"" + *c.variant + "\" of pair " + p.name +
                            " does not cover the same items as the original");
        }
        if (!original_scores) {
          original_scores = score_aligned(original.matrices[0].data, original.matrices[1].data, original.pair_keys,
                                          options);
        }
        a = *original_scores;
        b = score_aligned(variant.matrices[0].data, variant.matrices[1].data, variant.pair_keys, options);
        n_a = n_b = original.size();
      } else {
        const Subset sa = subset_by_group(original, *c.group_a);
        const Subset sb = subset_by_group(original, *c.group_b);
        if (sa.keys.empty() || sb.keys.empty()) {
          throw ArgumentError("contrast " + c.name + ": group \"" + (sa.keys.empty() ? *c.group_a : *c.group_b) +
                              "\" has no rows in pair " + p.name);
        }
        a = score_aligned(sa.x, sa.y, sa.keys, options);
        b = score_aligned(sb.x, sb.y, sb.keys, options);
        n_a = sa.keys.size();
        n_b = sb.keys.size();
      }
      for (std::size_t d = 0; d < options.directions.size(); ++d) {
        report.scores.push_back(
            {p.name, c.name, c.family, options.directions[d], a[d].score, b[d].score, n_a, n_b});
      }
    }
  }
  report.summaries = summarize_contrasts(report.scores);
  return report;
}

std::vector<ContrastSummary> summarize_contrasts(std::span<const ContrastScore> scores) {
  using Key = std::tuple<std::string, int>;
  std::map<Key, std::size_t> index;
  std::vector<ContrastSummary> out;
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  for (const auto& s : scores) {
    const Key key{s.contrast, static_cast<int>(s.direction)};
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      out.push_back({s.contrast, s.family, s.direction, 0, 0.0, 0.0, std::nullopt, {}});
      a.emplace_back();
      b.emplace_back();
    } else if (out[it->second].family != s.family) {
      throw FormatError("contrast " + s.contrast + " is listed under two families");
    }
    a[it->second].push_back(s.score_a);
    b[it->second].push_back(s.score_b);
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& s = out[i];
    s.n_pairs = static_cast<int>(a[i].size());
    s.mean_a = mean(a[i]);
    s.mean_b = mean(b[i]);
    if (s.n_pairs < 2) {
      s.note = "fewer than two model pairs";
      continue;
    }
    try {
      s.stats = paired_t(a[i], b[i]);
    } catch (const NumericError&) {
      s.note = "degenerate differences";
    }
  }

  std::map<std::tuple<std::string, int>, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].stats) families[{out[i].family, static_cast<int>(out[i].direction)}].push_back(i);
  }
  for (const auto& [key, members] : families) {
    std::vector<double> p;
    for (auto i : members) p.push_back(out[i].stats->p);
    const auto q = bh_fdr(p);
    for (std::size_t m = 0; m < members.size(); ++m) out[members[m]].stats->q = q[m];
  }
  return out;
}

}  // namespace xalign
