#include "test_util.hpp"
#include "xalign/errors.hpp"
#include "xalign/correlation.hpp"
#include "xalign/parallel.hpp"
#include "xalign/predictivity.hpp"
#include "xalign/reference.hpp"
#include "xalign/ridge.hpp"
#include "xalign/synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace xalign;

namespace {

AlignmentResult predict_default(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::uint64_t seed) {
  const auto grid = default_lambda_grid();
  return linear_predictivity(x, y, make_folds(static_cast<std::size_t>(x.rows()), 5, seed), grid, seed);
}

// Restores the worker count after a test changes it.
struct ThreadGuard {
  int saved = thread_count();
  ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST(LambdaGrid, DefaultHasSeventeenDecades) {
  const auto g = default_lambda_grid();
  ASSERT_EQ(g.size(), 17u);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(g[i], std::pow(10.0, static_cast<double>(i) - 8.0));
}

TEST(LambdaGrid, Parsing) {
  EXPECT_EQ(parse_lambda_grid("default"), default_lambda_grid());
  EXPECT_EQ(parse_lambda_grid("0.5,2,10"), (std::vector<double>{0.5, 2, 10}));
  const auto ls = parse_lambda_grid("logspace:-2:2:5");
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_NEAR(ls.front(), 0.01, 1e-15);
  EXPECT_NEAR(ls[2], 1.0, 1e-15);
  EXPECT_NEAR(ls.back(), 100.0, 1e-12);
  EXPECT_EQ(parse_lambda_grid(""), default_lambda_grid());
  EXPECT_THROW(parse_lambda_grid(","), ArgumentError);
  EXPECT_THROW(parse_lambda_grid("1,-2"), ArgumentError);
  EXPECT_THROW(parse_lambda_grid("abc"), ArgumentError);
  EXPECT_THROW(parse_lambda_grid("logspace:0:1:0"), ArgumentError);
}

TEST(Predictivity, SelfPredictionIsNearOne) {
  const Eigen::MatrixXd x = testutil::gaussian(200, 16, 1);
  const auto r = predict_default(x, x, 4);
  EXPECT_GT(r.score, 0.999);
  EXPECT_EQ(r.per_fold_scores.size(), 5u);
  EXPECT_EQ(r.per_fold_lambda.size(), 5u);
  EXPECT_EQ(r.n_items, 200);
}

TEST(Predictivity, IndependentInputsScoreNearZero) {
  const Eigen::MatrixXd x = testutil::gaussian(300, 10, 2);
  const Eigen::MatrixXd y = testutil::gaussian(300, 8, 3);
  EXPECT_LT(std::abs(predict_default(x, y, 5).score), 0.05);
}

TEST(Predictivity, ScoreIsMeanOfFoldScores) {
  const Eigen::MatrixXd x = testutil::gaussian(60, 5, 6);
  const Eigen::MatrixXd y = x.leftCols(3) + 0.5 * testutil::gaussian(60, 3, 7);
  const auto r = predict_default(x, y, 8);
  double sum = 0;
  for (double s : r.per_fold_scores) sum += s;
  EXPECT_NEAR(r.score, sum / 5.0, 1e-15);
  for (double l : r.per_fold_lambda) {
    const auto g = default_lambda_grid();
    EXPECT_NE(std::find(g.begin(), g.end(), l), g.end());
  }
}

TEST(Predictivity, MatchesSerialReferenceOnSynth) {
  SynthConfig c;
  c.n_items = 120;
  c.latent_dim = 6;
  c.d_vision = 20;
  c.d_language = 12;
  c.shared_fraction = {0.7};
  c.seed = 7;
  const auto data = generate(c);
  const Eigen::MatrixXd& x = data.vision[0][0].data;
  const Eigen::MatrixXd& y = data.language[0][0].data;
  const auto plan = make_folds(120, 5, 7);
  const auto grid = default_lambda_grid();
  const auto fast = linear_predictivity(x, y, plan, grid, 7);
  const auto ref = reference::linear_predictivity(x, y, plan, grid, 7);
  EXPECT_NEAR(fast.score, ref.score, 1e-6);
  ASSERT_EQ(ref.per_fold_scores.size(), 5u);
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_NEAR(fast.per_fold_scores[f], ref.per_fold_scores[f], 1e-6);
    EXPECT_EQ(fast.per_fold_lambda[f], ref.per_fold_lambda[f]);
  }
}

TEST(Predictivity, BitIdenticalAcrossThreadCounts) {
  ThreadGuard guard;
  const Eigen::MatrixXd a = testutil::gaussian(80, 7, 11);
  const Eigen::MatrixXd b = a.leftCols(4) * 0.8 + testutil::gaussian(80, 4, 12);
  const Eigen::MatrixXd c = testutil::gaussian(80, 5, 13) + a.rightCols(5);
  const std::vector<const Eigen::MatrixXd*> preds = {&a, &c};
  const std::vector<const Eigen::MatrixXd*> targets = {&b, &c, &a};
  const auto plan = make_folds(80, 5, 3);
  const auto grid = default_lambda_grid();
  set_thread_count(1);
  const auto serial = linear_predictivity_all_pairs(preds, targets, plan, grid, 3);
  set_thread_count(4);
  const auto parallel = linear_predictivity_all_pairs(preds, targets, plan, grid, 3);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < targets.size(); ++j) {
      EXPECT_EQ(serial[i][j].score, parallel[i][j].score);
      EXPECT_EQ(serial[i][j].per_fold_scores, parallel[i][j].per_fold_scores);
      EXPECT_EQ(serial[i][j].per_fold_lambda, parallel[i][j].per_fold_lambda);
      // All-pairs agrees exactly with the single-pair entry point.
      EXPECT_EQ(linear_predictivity(*preds[i], *targets[j], plan, grid, 3).score, serial[i][j].score);
    }
  }
}

TEST(Predictivity, TooFewRowsPerSplit) {
  const auto grid = default_lambda_grid();
  const Eigen::MatrixXd x18 = testutil::gaussian(18, 3, 1);
  EXPECT_THROW(linear_predictivity(x18, x18, make_folds(18, 5, 0), grid, 0), ArgumentError);
  const Eigen::MatrixXd x19 = testutil::gaussian(19, 3, 1);
  EXPECT_NO_THROW(linear_predictivity(x19, x19, make_folds(19, 5, 0), grid, 0));
}

TEST(Predictivity, NestedSplitsNeverLeakEvaluationRows) {
  std::vector<std::string> keys;
  for (int i = 0; i < 40; ++i) {
    for (int r = 0; r < 1 + i % 3; ++r) keys.push_back("k" + std::to_string(i));
  }
  const auto plan = make_folds_for_keys(keys, 5, 21);
  const auto splits = make_nested_splits(plan, 21);
  ASSERT_EQ(splits.outer, 5);
  ASSERT_EQ(splits.inner, 5);
  for (int f = 0; f < 5; ++f) {
    const auto& outer = splits.outer_split(f);
    const std::set<Eigen::Index> outer_eval(outer.eval.begin(), outer.eval.end());
    const std::set<Eigen::Index> outer_train(outer.train.begin(), outer.train.end());
    EXPECT_EQ(outer_eval.size() + outer_train.size(), keys.size());
    std::set<std::string> eval_keys;
    for (auto r : outer.eval) eval_keys.insert(keys[static_cast<std::size_t>(r)]);
    for (auto r : outer.train) {
      EXPECT_FALSE(outer_eval.count(r));
      EXPECT_FALSE(eval_keys.count(keys[static_cast<std::size_t>(r)])) << "pair key spans train and eval";
    }
    for (int i = 0; i < 5; ++i) {
      const auto& s = splits.inner_split(f, i);
      std::set<std::string> inner_eval_keys;
      for (auto r : s.eval) {
        EXPECT_TRUE(outer_train.count(r)) << "inner evaluation row outside the outer training set";
        inner_eval_keys.insert(keys[static_cast<std::size_t>(r)]);
      }
      for (auto r : s.train) {
        EXPECT_TRUE(outer_train.count(r));
        EXPECT_FALSE(inner_eval_keys.count(keys[static_cast<std::size_t>(r)]));
      }
      EXPECT_EQ(s.train.size() + s.eval.size(), outer.train.size());
    }
  }
}

TEST(Predictivity, FoldScoresComeFromTrainingRowsOnly) {
  // Refit each outer fold by hand on its training rows with the chosen penalty.
  const Eigen::MatrixXd x = testutil::gaussian(50, 4, 31);
  const Eigen::MatrixXd y = x.leftCols(2) + 0.3 * testutil::gaussian(50, 2, 32);
  const auto plan = make_folds(50, 5, 9);
  const auto r = linear_predictivity(x, y, plan, default_lambda_grid(), 9);
  for (int f = 0; f < 5; ++f) {
    const auto train = plan.train_rows(f);
    const auto test = plan.test_rows(f);
    const auto fit = fit_standardized(x(train, Eigen::all), y(train, Eigen::all), r.per_fold_lambda[static_cast<std::size_t>(f)]);
    const Eigen::MatrixXd yhat = predict(fit, x(test, Eigen::all));
    EXPECT_NEAR(pearson_mean(yhat, y(test, Eigen::all)), r.per_fold_scores[static_cast<std::size_t>(f)], 1e-10);
  }
}

TEST(Predictivity, NonFiniteInputIsRejected) {
  Eigen::MatrixXd x = testutil::gaussian(30, 3, 1);
  const Eigen::MatrixXd y = testutil::gaussian(30, 2, 2);
  x(4, 1) = std::nan("");
  EXPECT_THROW(predict_default(x, y, 0), NumericError);
}

TEST(CkaResult, CarriesShapes) {
  const Eigen::MatrixXd x = testutil::gaussian(20, 4, 1);
  const Eigen::MatrixXd y = testutil::gaussian(20, 6, 2);
  const auto r = cka_result(x, y, Direction::yx);
  EXPECT_EQ(r.metric, Metric::cka);
  EXPECT_EQ(r.direction, Direction::yx);
  EXPECT_EQ(r.d_source, 6);
  EXPECT_EQ(r.d_target, 4);
  EXPECT_TRUE(r.per_fold_scores.empty());
}
