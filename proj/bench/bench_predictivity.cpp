// Parallel SVD-path kernels versus the serial normal-equation reference on
// the same fold plan. Args: rows, features, targets (, threads).

#include "xalign/folds.hpp"
#include "xalign/parallel.hpp"
#include "xalign/predictivity.hpp"
#include "xalign/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

struct Problem {
  Eigen::MatrixXd x;
  std::vector<Eigen::MatrixXd> targets;
  xalign::FoldPlan plan;
  std::vector<double> grid = xalign::default_lambda_grid();
};

Problem make_problem(const benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto d = static_cast<Eigen::Index>(state.range(1));
  Problem p;
  p.x = gaussian(n, d, 1);
  for (int t = 0; t < state.range(2); ++t) p.targets.push_back(gaussian(n, d, 100 + static_cast<std::uint64_t>(t)));
  p.plan = xalign::make_folds(static_cast<std::size_t>(n), 5, 0);
  return p;
}

void BM_Parallel(benchmark::State& state) {
  const Problem p = make_problem(state);
  const int saved = xalign::thread_count();
  xalign::set_thread_count(static_cast<int>(state.range(3)));
  const Eigen::MatrixXd* preds[] = {&p.x};
  std::vector<const Eigen::MatrixXd*> targets;
  for (const auto& t : p.targets) targets.push_back(&t);
  for (auto _ : state) {
    benchmark::DoNotOptimize(xalign::linear_predictivity_all_pairs(preds, targets, p.plan, p.grid, 0));
  }
  xalign::set_thread_count(saved);
  state.SetItemsProcessed(state.iterations() * state.range(2));
}

void BM_Reference(benchmark::State& state) {
  const Problem p = make_problem(state);
  for (auto _ : state) {
    for (const auto& t : p.targets) {
      benchmark::DoNotOptimize(xalign::reference::linear_predictivity(p.x, t, p.plan, p.grid, 0));
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(2));
}

}  // namespace

BENCHMARK(BM_Parallel)
    ->ArgNames({"n", "d", "targets", "threads"})
    ->Args({500, 64, 4, 1})
    ->Args({500, 64, 4, 4})
    ->Args({1000, 256, 4, 1})
    ->Args({1000, 256, 4, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_Reference)
    ->ArgNames({"n", "d", "targets"})
    ->Args({500, 64, 4})
    ->Args({1000, 256, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
