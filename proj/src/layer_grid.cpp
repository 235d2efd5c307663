#include "xalign/cka.hpp"
#include "xalign/errors.hpp"
#include "xalign/experiments.hpp"
#include "xalign/parallel.hpp"

#include <algorithm>

namespace xalign {

AnalysisOptions analysis_options(const ExperimentSpec& spec) {
  AnalysisOptions o;
  o.metric = spec.metric;
  o.directions = spec.directions;
  o.seed = spec.seed;
  o.folds = spec.folds;
  o.lambda_grid = spec.lambda_grid;
  o.pairing = spec.pairing;
  return o;
}

AlignedRows align_pair(const EmbeddingMatrix& x, const EmbeddingMatrix& y, const DatasetManifest* manifest,
                       PairingPolicy policy) {
  const EmbeddingMatrix both[] = {x, y};
  return manifest ? align_rows(both, *manifest, policy) : align_by_item_id(both);
}

std::vector<AlignmentResult> score_aligned(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                           std::span<const std::string> pair_keys,
                                           const AnalysisOptions& options) {
  std::vector<AlignmentResult> out;
  if (options.metric == Metric::cka) {
    for (auto d : options.directions) out.push_back(cka_result(x, y, d));
    return out;
  }
  const FoldPlan plan = make_folds_for_keys(pair_keys, options.folds, options.seed);
  for (auto d : options.directions) {
    AlignmentResult r = d == Direction::xy ? linear_predictivity(x, y, plan, options.lambda_grid, options.seed)
                                           : linear_predictivity(y, x, plan, options.lambda_grid, options.seed);
    r.direction = d;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AlignRow> compute_align(std::span<const PairData> pairs, const DatasetManifest* manifest,
                                    const AnalysisOptions& options) {
  std::vector<AlignRow> rows;
  for (const auto& p : pairs) {
    const AlignedRows a = align_pair(p.x, p.y, manifest, options.pairing);
    for (auto& r : score_aligned(a.matrices[0].data, a.matrices[1].data, a.pair_keys, options)) {
      rows.push_back({p.name, std::move(r)});
    }
  }
  return rows;
}

const GridCell& LayerGrid::at(Direction d, int source_layer, int target_layer) const {
  for (const auto& c : cells) {
    if (c.direction == d && c.source_layer == source_layer && c.target_layer == target_layer) return c;
  }
  throw ArgumentError("no grid cell for layers " + std::to_string(source_layer) + " -> " +
                      std::to_string(target_layer));
}

namespace {

// Indices into `layers` for the requested layer numbers (all, ascending, when
// none are requested).
std::vector<std::size_t> pick_layers(std::span<const EmbeddingMatrix> layers, std::span<const int> wanted,
                                     const char* side) {
  std::vector<std::size_t> picks;
  if (wanted.empty()) {
    picks.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) picks[i] = i;
    std::stable_sort(picks.begin(), picks.end(),
                     [&](std::size_t a, std::size_t b) { return layers[a].layer_index < layers[b].layer_index; });
  } else {
    for (int layer : wanted) {
      auto it = std::find_if(layers.begin(), layers.end(), [&](const EmbeddingMatrix& m) { return m.layer_index == layer; });
      if (it == layers.end()) {
        const std::string model = layers.empty() ? std::string("?") : layers.front().model_id;
        throw ArgumentError(std::string(side) + " model " + model + " has no layer " + std::to_string(layer));
      }
      picks.push_back(static_cast<std::size_t>(it - layers.begin()));
    }
  }
  for (std::size_t a = 0; a < picks.size(); ++a) {
    for (std::size_t b = a + 1; b < picks.size(); ++b) {
      if (layers[picks[a]].layer_index == layers[picks[b]].layer_index) {
        throw ArgumentError(std::string(side) + " layer " + std::to_string(layers[picks[a]].layer_index) +
                            " appears twice");
      }
    }
  }
  return picks;
}

}  // namespace

LayerGrid compute_layer_grid(std::span<const EmbeddingMatrix> x_layers, std::span<const EmbeddingMatrix> y_layers,
                             const DatasetManifest* manifest, const AnalysisOptions& options,
                             std::span<const int> source_layers, std::span<const int> target_layers) {
  if (x_layers.empty() || y_layers.empty()) throw ArgumentError("layer grid needs layers on both sides");
  const auto xs = pick_layers(x_layers, source_layers, "x");
  const auto ys = pick_layers(y_layers, target_layers, "y");

  std::vector<EmbeddingMatrix> all;
  for (auto i : xs) all.push_back(x_layers[i]);
  for (auto j : ys) all.push_back(y_layers[j]);
  const AlignedRows aligned = manifest ? align_rows(all, *manifest, options.pairing) : align_by_item_id(all);

  LayerGrid grid;
  grid.x_model = x_layers.front().model_id;
  grid.y_model = y_layers.front().model_id;
  for (auto i : xs) grid.source_layers.push_back(x_layers[i].layer_index);
  for (auto j : ys) grid.target_layers.push_back(y_layers[j].layer_index);

  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  std::vector<const Eigen::MatrixXd*> xm;
  std::vector<const Eigen::MatrixXd*> ym;
  for (std::size_t i = 0; i < nx; ++i) xm.push_back(&aligned.matrices[i].data);
  for (std::size_t j = 0; j < ny; ++j) ym.push_back(&aligned.matrices[nx + j].data);

  if (options.metric == Metric::cka) {
    std::vector<double> scores(nx * ny);
    const int threads = thread_count();
    const int n = static_cast<int>(nx * ny);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int c = 0; c < n; ++c) {
      try {
        scores[static_cast<std::size_t>(c)] =
            cka_linear(*xm[static_cast<std::size_t>(c) / ny], *ym[static_cast<std::size_t>(c) % ny]);
      } catch (...) {
#pragma omp critical(xalign_grid_error)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (auto d : options.directions) {
      for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
          GridCell cell{d, grid.source_layers[i], grid.target_layers[j], {}};
          cell.result.direction = d;
          cell.result.metric = Metric::cka;
          cell.result.score = scores[i * ny + j];
          cell.result.n_items = xm[i]->rows();
          cell.result.d_source = d == Direction::xy ? xm[i]->cols() : ym[j]->cols();
          cell.result.d_target = d == Direction::xy ? ym[j]->cols() : xm[i]->cols();
          grid.cells.push_back(std::move(cell));
        }
      }
    }
    return grid;
  }

  const FoldPlan plan = make_folds_for_keys(aligned.pair_keys, options.folds, options.seed);
  for (auto d : options.directions) {
    if (d == Direction::xy) {
      auto r = linear_predictivity_all_pairs(xm, ym, plan, options.lambda_grid, options.seed);
      for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
          r[i][j].direction = d;
          grid.cells.push_back({d, grid.source_layers[i], grid.target_layers[j], std::move(r[i][j])});
        }
      }
    } else {
      auto r = linear_predictivity_all_pairs(ym, xm, plan, options.lambda_grid, options.seed);
      for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
          r[j][i].direction = d;
          grid.cells.push_back({d, grid.source_layers[i], grid.target_layers[j], std::move(r[j][i])});
        }
      }
    }
  }
  return grid;
}

}  // namespace xalign
