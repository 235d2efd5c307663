#pragma once

#include "xalign/embedding.hpp"
#include "xalign/experiment_spec.hpp"
#include "xalign/manifest.hpp"
#include "xalign/predictivity.hpp"
#include "xalign/stats.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xalign {

/// Scoring settings shared by every experiment.
struct AnalysisOptions {
  Metric metric = Metric::linear_predictivity;
  std::vector<Direction> directions{Direction::xy, Direction::yx};
  std::uint64_t seed = 0;
  int folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  PairingPolicy pairing = PairingPolicy::one_to_one;
};

AnalysisOptions analysis_options(const ExperimentSpec& spec);

/// Aligns x and y through the manifest, or by item id when it is null.
AlignedRows align_pair(const EmbeddingMatrix& x, const EmbeddingMatrix& y, const DatasetManifest* manifest,
                       PairingPolicy policy);

/// Scores row-aligned x and y in every requested direction under one fold
/// plan built from `pair_keys`. Results follow `options.directions`.
std::vector<AlignmentResult> score_aligned(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                           std::span<const std::string> pair_keys,
                                           const AnalysisOptions& options);

struct PairData {
  std::string name;
  EmbeddingMatrix x;
  EmbeddingMatrix y;
};

// ---------------------------------------------------------------- align

struct AlignRow {
  std::string pair;
  AlignmentResult result;
};

std::vector<AlignRow> compute_align(std::span<const PairData> pairs, const DatasetManifest* manifest,
                                    const AnalysisOptions& options);

// ----------------------------------------------------------- layer grid

struct GridCell {
  Direction direction = Direction::xy;
  int source_layer = 0;  // x-side layer index
  int target_layer = 0;  // y-side layer index
  AlignmentResult result;
};

struct LayerGrid {
  std::string x_model;
  std::string y_model;
  std::vector<int> source_layers;
  std::vector<int> target_layers;
  std::vector<GridCell> cells;  // direction-major, then source, then target

  const GridCell& at(Direction d, int source_layer, int target_layer) const;
};

/// Every (x layer, y layer) combination under one shared fold plan.
/// `source_layers` / `target_layers` select layers by index; empty selects
/// all. Throws ArgumentError naming a requested layer that is absent.
LayerGrid compute_layer_grid(std::span<const EmbeddingMatrix> x_layers, std::span<const EmbeddingMatrix> y_layers,
                             const DatasetManifest* manifest, const AnalysisOptions& options,
                             std::span<const int> source_layers = {}, std::span<const int> target_layers = {});

// -------------------------------------------------------- group contrast

struct VariantData {
  std::optional<EmbeddingMatrix> x;
  std::optional<EmbeddingMatrix> y;
};

struct ContrastPairData {
  std::string name;
  EmbeddingMatrix x;
  EmbeddingMatrix y;
  std::map<std::string, VariantData> variants;
};

/// One (pair, contrast, direction) measurement: a is the original or first
/// group, b the variant or second group.
struct ContrastScore {
  std::string pair;
  std::string contrast;
  std::string family;
  Direction direction = Direction::xy;
  double score_a = 0.0;
  double score_b = 0.0;
  std::size_t n_rows_a = 0;
  std::size_t n_rows_b = 0;
};

struct ContrastSummary {
  std::string contrast;
  std::string family;
  Direction direction = Direction::xy;
  int n_pairs = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  /// Absent with fewer than two pairs or degenerate differences.
  std::optional<StatsResult> stats;
  std::string note;
};

struct ContrastReport {
  std::vector<ContrastScore> scores;
  std::vector<ContrastSummary> summaries;
};

ContrastReport compute_group_contrast(std::span<const ContrastPairData> pairs, const DatasetManifest* manifest,
                                      std::span<const ContrastSpec> contrasts, const AnalysisOptions& options);

/// Paired t-tests of a versus b per (contrast, direction), then BH
/// adjustment within each (family, direction).
std::vector<ContrastSummary> summarize_contrasts(std::span<const ContrastScore> scores);

// --------------------------------------------------------- aggregation

struct CurvePoint {
  int k = 1;
  Direction direction = Direction::xy;
  double mean = 0.0;
  double std_error = 0.0;  // NaN with a single pair
  std::vector<double> per_pair;
};

struct AggregationOptions {
  Side side = Side::y;
  int k_max = 1;
  bool drop_deficient = false;
};

/// Score curve as the aggregated side averages its first k exemplars
/// (by exemplar_index), k = 1..k_max, against the other side's first
/// exemplar. Rows and the fold plan are fixed across k. Pair keys with fewer
/// than k_max exemplars raise FormatError, or are dropped when requested.
std::vector<CurvePoint> compute_aggregation_curve(std::span<const PairData> pairs, const DatasetManifest& manifest,
                                                  const AggregationOptions& aggregation,
                                                  const AnalysisOptions& options);

// ------------------------------------------------------ shuffled baseline

/// Uniformly random permutation of 0..n-1 without fixed points.
std::vector<std::size_t> random_derangement(std::size_t n, std::uint64_t seed);

/// Reassigns the pair_keys of every item on the y side's modality by a
/// derangement of the keys that have items on both sides, so that no key
/// keeps its own partner.
DatasetManifest shuffle_manifest(const DatasetManifest& manifest, std::span<const EmbeddingMatrix> x_side,
                                 std::span<const EmbeddingMatrix> y_side, std::uint64_t seed);

struct BaselineReport {
  ExperimentKind baseline_of = ExperimentKind::align;
  // For align the curves hold a single point with k = 1.
  std::vector<CurvePoint> matched;
  std::vector<CurvePoint> shuffled;
  ContrastReport contrast;  // matched (a) versus shuffled (b)
};

BaselineReport compute_shuffled_baseline(std::span<const PairData> pairs, const DatasetManifest* manifest,
                                         ExperimentKind baseline_of, int shuffle_count,
                                         const AggregationOptions& aggregation, const AnalysisOptions& options);

// --------------------------------------------------------- file drivers

std::vector<AlignRow> run_align(const ExperimentSpec& spec);
LayerGrid run_layer_grid(const ExperimentSpec& spec);
ContrastReport run_group_contrast(const ExperimentSpec& spec);
std::vector<CurvePoint> run_aggregation_curve(const ExperimentSpec& spec);
BaselineReport run_shuffled_baseline(const ExperimentSpec& spec);

}  // namespace xalign
