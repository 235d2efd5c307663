#pragma once

#include "xalign/experiments.hpp"

#include <limits>

namespace xalign::detail {

inline CurvePoint curve_point(int k, Direction d, std::vector<double> per_pair) {
  CurvePoint c;
  c.k = k;
  c.direction = d;
  c.mean = mean(per_pair);
  c.std_error = per_pair.size() >= 2 ? standard_error(per_pair) : std::numeric_limits<double>::quiet_NaN();
  c.per_pair = std::move(per_pair);
  return c;
}

/// scores[direction][k - 1] of one model pair's aggregation curve.
std::vector<std::vector<double>> aggregation_pair_curve(const PairData& p, const DatasetManifest& manifest,
                                                        const AggregationOptions& agg,
                                                        const AnalysisOptions& options);

}  // namespace xalign::detail
