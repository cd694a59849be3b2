// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "xpfn/common/rng.hpp"
#include "xpfn/eval/dag_recovery.hpp"
#include "xpfn/eval/metrics.hpp"
#include "xpfn/shap/shapley.hpp"

namespace xpfn::eval {
namespace {

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t m) {
  Matrix out(n, m);
  for (double& v : out.values()) v = uniform(rng, -1, 1);
  return out;
}

TEST(PearsonTest, IdentityNegationAffine) {
  Rng rng(1);
  Matrix a = random_matrix(rng, 10, 3);
  Matrix neg = a, aff = a;
  for (double& v : neg.values()) v = -v;
  for (double& v : aff.values()) v = 2 * v + 3;
  EXPECT_DOUBLE_EQ(pearson(a, a), 1.0);
  EXPECT_DOUBLE_EQ(pearson(a, neg), -1.0);
  EXPECT_NEAR(pearson(a, aff), 1.0, 1e-12);
}

TEST(PearsonTest, PositiveAffineInvariance) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    Matrix a = random_matrix(rng, 20, 4), b = random_matrix(rng, 20, 4);
    double r = pearson(a, b);
    double s = uniform(rng, 0.01, 100), c = uniform(rng, -50, 50);
    Matrix t_a = a;
    for (double& v : t_a.values()) v = s * v + c;
    EXPECT_NEAR(pearson(t_a, b), r, 1e-12);
    EXPECT_NEAR(pearson(b, t_a), r, 1e-12);
  }
}

TEST(PearsonTest, ConstantInputIsAnError) {
  std::vector<double> a = {1, 2, 3}, c = {4, 4, 4};
  EXPECT_THROW(pearson(a, c), UndefinedCorrelation);
  EXPECT_THROW(pearson(c, a), UndefinedCorrelation);
  EXPECT_THROW(pearson(a, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(JaccardTest, SetArithmetic) {
  // Top-2 sets {1,2} and {2,3}.
  std::vector<double> a = {0.0, 0.9, -0.8, 0.1}, b = {0.0, 0.1, 0.9, -0.8};
  EXPECT_DOUBLE_EQ(jaccard_topk(a, b, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard_topk(a, a, 2), 1.0);
  EXPECT_EQ(default_topk(4), 1u);
  EXPECT_EQ(default_topk(2), 1u);
  EXPECT_EQ(default_topk(9), 3u);
  EXPECT_THROW(jaccard_topk(a, b, 5), InvalidArgument);
  EXPECT_THROW(jaccard_topk(a, b, 0), InvalidArgument);
}

TEST(JaccardTest, TiesGoToLowerIndex) {
  std::vector<double> v = {0.5, -0.5, 0.5, 0.1};
  EXPECT_EQ(topk_indices(v, 2), (std::vector<std::size_t>{0, 1}));
}

TEST(JaccardTest, SymmetricAndOneIffSameSets) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::size_t m = 2 + uniform_index(rng, 8);
    std::vector<double> a(m), b(m);
    for (auto& v : a) v = uniform(rng, -1, 1);
    for (auto& v : b) v = uniform(rng, -1, 1);
    std::size_t k = 1 + uniform_index(rng, m);
    double j = jaccard_topk(a, b, k);
    EXPECT_EQ(j, jaccard_topk(b, a, k));
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
    EXPECT_EQ(j == 1.0, topk_indices(a, k) == topk_indices(b, k));
  }
}

TEST(RuntimeTest, NoOpIsFastAndMedianIsRobust) {
  EXPECT_LT(measure_runtime([] {}, 5), 1e-3);
  int calls = 0;
  double t = measure_runtime(
      [&] {
        if (calls++ == 0) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      },
      5);
  EXPECT_LT(t, 0.01);
  EXPECT_THROW(measure_runtime([] {}, 2), InvalidArgument);
  EXPECT_DOUBLE_EQ(per_thousand_contributions(2.0, 500), 4.0);
}

TEST(RuntimeTest, ExactShapleyGrowsWithInstances) {
  shap::PredictFn f = [](const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = 0;
      for (double v : x.row(i)) s += std::sin(v) * std::cos(v);
      out[i] = s;
    }
    return out;
  };
  Rng rng(4);
  shap::ShapConfig cfg;
  cfg.mode = shap::ShapMode::kExact;
  cfg.background = random_matrix(rng, 64, 8);
  Matrix x1 = random_matrix(rng, 20, 8), x2 = random_matrix(rng, 40, 8);
  double t1 = measure_runtime([&] { shap::hybrid_shapley(f, x1, cfg); }, 3);
  double t2 = measure_runtime([&] { shap::hybrid_shapley(f, x2, cfg); }, 3);
  EXPECT_GT(t2, t1);
}

TEST(ReportTest, JsonRoundTripAndCsv) {
  MetricReport r{"toy", "knn", 4, "mlp", 42, 0.5, 0.25, 0.125};
  MetricReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(report_csv_row(back), report_csv_row(r));
  EXPECT_EQ(report_csv_row(r), "toy,knn,4,mlp,42,0.5,0.25,0.125");
  r.pearson.reset();
  EXPECT_FALSE(report_from_json(report_to_json(r)).pearson.has_value());
  EXPECT_NE(report_csv_row(r).find(",nan,"), std::string::npos);
}

TEST(GedTest, SymmetricDifferenceArithmetic) {
  EdgeList truth = {{0, 1}, {1, 2}};
  EXPECT_EQ(graph_edit_distance(truth, truth), 0u);
  EXPECT_EQ(graph_edit_distance(truth, {{0, 1}, {1, 2}, {0, 2}}), 1u);
  EXPECT_EQ(graph_edit_distance(truth, {{1, 0}, {1, 2}}), 2u);
}

TEST(GedTest, MatchesBruteForceSetComputation) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::size_t m = 2 + uniform_index(rng, 6);
    EdgeList a, b;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        if (uniform(rng, 0, 1) < 0.3) a.emplace_back(i, j);
        if (uniform(rng, 0, 1) < 0.3) b.emplace_back(i, j);
      }
    // Brute force over every ordered pair.
    std::size_t expected = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        bool in_a = std::find(a.begin(), a.end(), std::make_pair(i, j)) != a.end();
        bool in_b = std::find(b.begin(), b.end(), std::make_pair(i, j)) != b.end();
        expected += in_a != in_b;
      }
    EXPECT_EQ(graph_edit_distance(a, b), expected);
  }
}

TEST(EdgeSelectionTest, TopAndPercentile) {
  Matrix w = Matrix::from_rows({{9, 0.5, 0.2}, {0.7, 9, 0.1}, {0.3, 0.6, 9}});
  EXPECT_EQ(top_edges(w, 2), (EdgeList{{1, 0}, {2, 1}}));
  EXPECT_EQ(top_edges(w, 100).size(), 6u);
  EXPECT_EQ(percentile_edges(w, 0).size(), 6u);
  EXPECT_EQ(percentile_edges(w, 100), (EdgeList{{1, 0}}));
}

TEST(EdgeSelectionTest, PerfectWeightsGiveZeroGed) {
  EdgeList truth = {{0, 2}, {1, 2}, {2, 3}};
  Matrix w(4, 4);
  for (auto [k, j] : truth) w(k, j) = 1.0;
  DagRecoveryConfig cfg;
  cfg.budgets = {3};
  DagRecoveryResult r = score_edge_weights(w, truth, cfg);
  EXPECT_EQ(r.ged[0], 0.0);
  EXPECT_GT(r.random_ged[0], 0.0);
  cfg.budgets = {5, 3};
  EXPECT_THROW(score_edge_weights(w, truth, cfg), InvalidArgument);
}

TEST(DagRecoveryTest, TrueEdgesDropTargetAndReindex) {
  scm::ScmTask task;
  task.dag.node_count = 4;
  task.dag.edges = {{0, 1, {}}, {1, 2, {}}, {2, 3, {}}, {0, 3, {}}};
  task.feature_nodes = {3, 0, 1};
  task.target_node = 2;
  EXPECT_EQ(true_feature_edges(task), (EdgeList{{1, 0}, {1, 2}}));
}

TEST(DagRecoveryTest, RunsEndToEndOnUntrainedWeights) {
  explainer::ExplainerConfig c;
  c.embed_dim = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.ffn_dim = 16;
  c.max_features = 4;
  explainer::ExplainerWeights w = explainer::init_weights(c, 1);
  scm::ScmTask task;
  task.dag.node_count = 5;
  task.dag.edges = {{0, 1, {}}, {1, 2, {}}, {2, 3, {}}};
  task.feature_nodes = {0, 1, 2, 3};
  task.target_node = 4;
  Rng rng(6);
  task.samples = random_matrix(rng, 30, 5);
  DagRecoveryResult r = dag_recovery(w, task, {});
  ASSERT_EQ(r.ged.size(), 3u);
  EXPECT_EQ(r.kept[0].size(), 3u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r.weights(k, k), 0.0);
  DagRecoveryConfig threaded;
  threaded.threads = 3;
  EXPECT_EQ(dag_recovery(w, task, threaded).weights, r.weights);
  EXPECT_TRUE(recovery_to_json(r).contains("random_ged"));
  scm::ScmTask single = task;
  single.feature_nodes = {0};
  EXPECT_THROW(dag_recovery(w, single, {}), InvalidArgument);
}

}  // namespace
}  // namespace xpfn::eval
