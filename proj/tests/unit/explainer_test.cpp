// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "xpfn/autodiff/gradcheck.hpp"
#include "xpfn/common/binary_io.hpp"
#include "xpfn/explainer/explainer.hpp"

namespace xpfn::explainer {
namespace {

namespace fs = std::filesystem;

ExplainerConfig micro_config() {
  ExplainerConfig c;
  c.embed_dim = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.ffn_dim = 16;
  c.bucket_edges = default_bucket_edges(4);
  c.max_features = 4;
  c.max_context_rows = 64;
  return c;
}

ExplainerConfig small_config() {
  ExplainerConfig c;
  c.embed_dim = 16;
  c.n_layers = 2;
  c.n_heads = 2;
  c.ffn_dim = 32;
  c.bucket_edges = default_bucket_edges(12);
  c.max_features = 5;
  c.max_context_rows = 128;
  return c;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = uniform(rng, -1.0, 1.0);
  return m;
}

// A toy task family with a learnable answer: y = sigmoid(w.x), phi ~ w_j x_j.
TrainingTask linear_task(Rng& rng) {
  std::size_t m = 1 + uniform_index(rng, 3);
  std::size_t n = 24 + uniform_index(rng, 16);
  TrainingTask t;
  t.x = random_matrix(n, m, rng);
  std::vector<double> w(m);
  for (double& v : w) v = uniform(rng, -2.0, 2.0);
  t.phi = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0;
    for (std::size_t j = 0; j < m; ++j) {
      z += w[j] * t.x(i, j);
      t.phi(i, j) = 0.25 * w[j] * t.x(i, j);
    }
    t.y_hat.push_back(0.5 + 0.25 * z);
  }
  return t;
}

TEST(BucketTest, DefaultLayout) {
  std::vector<double> e = default_bucket_edges();
  ASSERT_EQ(e.size(), 33u);
  EXPECT_EQ(e.front(), -4.5);
  EXPECT_EQ(e[1], -4.0);
  EXPECT_EQ(e[31], 4.0);
  EXPECT_EQ(e.back(), 4.5);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_GT(e[i], e[i - 1]);
  std::vector<double> c = bucket_centers(e);
  EXPECT_DOUBLE_EQ(c.front(), -4.25);
  EXPECT_DOUBLE_EQ(c.back(), 4.25);
}

TEST(BucketTest, HalfOpenAssignmentAndClamping) {
  std::vector<double> e{-2, -1, 0, 1, 2};
  EXPECT_EQ(bucket_index(e, -0.5), 1u);
  EXPECT_EQ(bucket_index(e, 0.0), 2u);  // interior edge goes to the higher bucket
  EXPECT_EQ(bucket_index(e, -1.0), 1u);
  EXPECT_EQ(bucket_index(e, -7.0), 0u);
  EXPECT_EQ(bucket_index(e, 2.0), 3u);
  EXPECT_EQ(bucket_index(e, 9.0), 3u);
}

TEST(ConfigTest, Validation) {
  ExplainerConfig c = micro_config();
  EXPECT_NO_THROW(c.validate());
  c.embed_dim = 9;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = micro_config();
  c.bucket_edges = {0.0, 1.0, 1.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.bucket_edges = {0.0, 1.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = micro_config();
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
}

TEST(EncodeTest, SlotOrder) {
  Matrix x = Matrix::from_rows({{10, 20, 30}});
  std::vector<double> y{0.7};
  Matrix s = slot_matrix(x, y, 1, 5);
  std::vector<double> row(s.row(0).begin(), s.row(0).end());
  EXPECT_EQ(row, (std::vector<double>{0.7, 20, 10, 30, 0, 0}));
  Matrix one = slot_matrix(Matrix::from_rows({{4}}), y, 0, 3);
  EXPECT_EQ(std::vector<double>(one.row(0).begin(), one.row(0).end()), (std::vector<double>{0.7, 4, 0, 0}));
  EXPECT_THROW(slot_matrix(Matrix(1, 6), std::vector<double>{0.1}, 0, 5), InvalidArgument);
}

TEST(EncodeTest, IdenticalRowsGiveIdenticalTokens) {
  ExplainerWeights w = init_weights(micro_config(), 1);
  Matrix x = Matrix::from_rows({{0.1, 0.2}, {0.5, -0.3}, {0.1, 0.2}});
  std::vector<double> y{0.4, 0.9, 0.4};
  ad::Graph g;
  ad::NodeId slots = g.input("slots");
  ad::NodeId tokens = build_tokens(g, w.config, slots, 2);
  ad::TensorMap feed = w.params;
  Matrix s = slot_matrix(x, y, 0, w.config.max_features);
  feed["slots"] = ad::Tensor::matrix(3, s.cols(), s.storage());
  const ad::Tensor& t = g.forward(feed, tokens);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(t[k], t[2 * 8 + k]);
}

TEST(ForwardTest, DistributionsAndEquivariance) {
  Rng rng = make_rng(2);
  ExplainerWeights w = init_weights(small_config(), 3);
  Matrix x = random_matrix(20, 3, rng);
  std::vector<double> y(20);
  for (double& v : y) v = uniform(rng, 0, 1);
  Matrix ref = random_matrix(15, 3, rng);
  std::vector<double> yref(15);
  for (double& v : yref) v = uniform(rng, 0, 1);

  Matrix p = forward(w, x, y, 1, ref, yref);
  ASSERT_EQ(p.rows(), 20u);
  ASSERT_EQ(p.cols(), 12u);
  for (std::size_t i = 0; i < 20; ++i) {
    double s = 0;
    for (double v : p.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }

  // Reversing query rows reverses the outputs.
  std::vector<std::size_t> rev(20);
  for (std::size_t i = 0; i < 20; ++i) rev[i] = 19 - i;
  std::vector<double> yrev(y.rbegin(), y.rend());
  Matrix pr = forward(w, x.select_rows(rev), yrev, 1, ref, yref);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(pr(19 - i, k), p(i, k), 1e-12);

  // Duplicated query row gives a duplicated distribution.
  std::vector<std::size_t> dup{3, 3};
  Matrix pd = forward(w, x.select_rows(dup), std::vector<double>{y[3], y[3]}, 1, ref, yref);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(pd(0, k), pd(1, k));
}

TEST(ForwardTest, ContextOverflowIsAnError) {
  ExplainerConfig c = micro_config();
  ExplainerWeights w = init_weights(c, 1);
  Matrix x(40, 2);
  std::vector<double> y(40, 0.5);
  try {
    forward(w, x, y, 0, x, y);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("chunk"), std::string::npos);
  }
}

TEST(PointEstimateTest, Definitions) {
  std::vector<double> centers{-1, 0, 0.7, 1};
  EXPECT_EQ(point_estimate(std::vector<double>{0, 0, 1, 0}, centers), 0.7);
  std::vector<double> sym{-1, 0, 1};
  EXPECT_EQ(point_estimate(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, sym), 0.0);
  EXPECT_EQ(point_estimate(std::vector<double>{0.2, 0.6, 0.2}, sym), 0.0);
}

TEST(NlpdTest, OneHotAndUniform) {
  std::vector<double> edges{-2, -1, 0, 1, 2};
  std::vector<double> targets{-1.5, -0.5, 0.0, 1.5, 5.0};
  Matrix onehot(5, 4);
  for (std::size_t t = 0; t < 5; ++t) onehot(t, bucket_index(edges, targets[t])) = 1.0;
  EXPECT_EQ(nlpd_loss(onehot, targets, edges), 0.0);
  Matrix uni(5, 4, 0.25);
  EXPECT_EQ(nlpd_loss(uni, targets, edges), 5 * std::log(4.0));
  Matrix zero(5, 4, 0.0);
  EXPECT_NEAR(nlpd_loss(zero, targets, edges), -5 * std::log(1e-12), 1e-9);
}

TEST(StandardizeTest, Definitions) {
  Matrix phi = Matrix::from_rows({{0.1, 0.3}, {0.1, 0.3}});
  StandardizationStats s;
  Matrix z = standardize_targets(phi, &s);
  EXPECT_NEAR(s.mean, 0.2, 1e-15);
  EXPECT_NEAR(s.std, 0.1, 1e-15);
  EXPECT_NEAR(z(0, 1), 1.0, 1e-12);
  Rng rng = make_rng(4);
  Matrix r = standardize_targets(random_matrix(30, 4, rng));
  EXPECT_NEAR(mean(r.values()), 0.0, 1e-9);
  EXPECT_NEAR(population_std(r.values()), 1.0, 1e-9);
  Matrix flat = standardize_targets(Matrix(3, 3, 0.4), &s);
  EXPECT_EQ(s.std, 1.0);
  for (double v : flat.values()) EXPECT_EQ(v, 0.0);
}

TEST(GradientTest, MicroModelPassesFiniteDifferences) {
  ExplainerConfig c = micro_config();
  ExplainerWeights w = init_weights(c, 5);
  Rng rng = make_rng(6);
  Matrix x = random_matrix(6, 3, rng);
  std::vector<double> y(6);
  for (double& v : y) v = uniform(rng, 0, 1);
  std::vector<double> targets{-4.2, -1.0, 0.3, 2.0, 4.4, 0.0};
  InputStats stats = fit_input_stats(x, y);
  ad::TensorMap inputs = w.params;
  Matrix s = slot_matrix(x, y, 1, c.max_features, &stats);
  inputs["slots"] = ad::Tensor::matrix(6, s.cols(), s.storage());
  auto build = [&](ad::Graph& g) { return build_loss(g, c, g.input("slots"), 3, targets); };
  ad::GradCheckResult r = ad::finite_difference_check(build, inputs, 1e-6);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_input << "[" << r.worst_index << "]";
  EXPECT_GT(r.checked, w.parameter_count());
}

TEST(TrainTest, ZeroStepsReturnsInitialization) {
  ExplainerConfig c = micro_config();
  c.steps = 0;
  c.restarts = 1;
  c.seed = 9;
  ExplainerWeights w = train(linear_task, c);
  ExplainerWeights init = init_weights(c, derive_seed(9, {0}));
  EXPECT_EQ(w.params, init.params);
  EXPECT_EQ(w.meta.final_loss, w.meta.initial_loss);
  EXPECT_TRUE(std::isfinite(w.meta.initial_loss));
}

TEST(TrainTest, LossDecreasesAndIsDeterministic) {
  ExplainerConfig c = small_config();
  c.steps = 300;
  c.restarts = 2;
  c.lr_min = 1e-3;
  c.lr_max = 3e-3;
  c.smooth_window = 30;
  c.seed = 10;
  ExplainerWeights a = train(linear_task, c);
  const auto& h = a.meta.loss_history;
  ASSERT_EQ(h.size(), 300u);
  double first = 0, last = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    first += h[i];
    last += h[h.size() - 1 - i];
  }
  EXPECT_LT(last, first);
  EXPECT_LT(a.meta.final_loss, a.meta.initial_loss);
  EXPECT_EQ(a.meta.restart_final_losses.size(), 2u);
  EXPECT_EQ(a.meta.final_loss,
            *std::min_element(a.meta.restart_final_losses.begin(), a.meta.restart_final_losses.end()));

  c.steps = 20;
  ExplainerWeights b1 = train(linear_task, c);
  ExplainerWeights b2 = train(linear_task, c);
  EXPECT_EQ(b1.params, b2.params);
}

TEST(TrainTest, DivergentRestartIsDropped) {
  ExplainerConfig c = micro_config();
  c.steps = 3;
  c.restarts = 2;
  int calls = 0;
  // Poisons the first task, which aborts the first restart.
  TaskSource source = [&](Rng& rng) {
    TrainingTask t = linear_task(rng);
    if (calls++ == 0) t.y_hat[0] = std::numeric_limits<double>::infinity();
    return t;
  };
  ExplainerWeights w = train(source, c);
  EXPECT_EQ(w.meta.chosen_restart, 1u);
  EXPECT_TRUE(std::isinf(w.meta.restart_final_losses[0]));
}

TEST(ExplainTest, ShapeBoundsAndDeterminism) {
  Rng rng = make_rng(11);
  ExplainerWeights w = init_weights(small_config(), 12);
  Matrix x = random_matrix(30, 4, rng);
  std::vector<double> y(30);
  for (double& v : y) v = uniform(rng, 0, 1);
  Matrix a = explain_zero_shot(w, x, y);
  ASSERT_EQ(a.rows(), 30u);
  ASSERT_EQ(a.cols(), 4u);
  std::vector<double> centers = bucket_centers(w.config.bucket_edges);
  for (double v : a.values()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, centers.front());
    EXPECT_LE(v, centers.back());
  }
  EXPECT_EQ(explain_zero_shot(w, x, y, 3), a);
  Matrix ref = random_matrix(10, 4, rng);
  std::vector<double> yref(10, 0.3);
  yref[0] = 0.9;
  Matrix b = explain_zero_shot(w, x, y, ref, yref);
  EXPECT_EQ(b.rows(), 30u);
  EXPECT_THROW(explain_zero_shot(w, Matrix(3, 6), std::vector<double>(3)), InvalidArgument);
}

class WeightsFileTest : public ::testing::Test {
 protected:
  fs::path dir_ = fs::temp_directory_path() / ("xpfn_weights_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  void SetUp() override { fs::create_directories(dir_); }
  void TearDown() override { fs::remove_all(dir_); }
};

TEST_F(WeightsFileTest, RoundTrip) {
  ExplainerConfig c = micro_config();
  c.steps = 5;
  c.restarts = 1;
  c.lr_min = c.lr_max = 1e-3;
  ExplainerWeights w = train(linear_task, c);
  save_weights(dir_ / "a.bin", w);
  ExplainerWeights back = load_weights(dir_ / "a.bin");
  save_weights(dir_ / "b.bin", back);
  EXPECT_EQ(read_file(dir_ / "a.bin"), read_file(dir_ / "b.bin"));
  EXPECT_EQ(back.params, w.params);
  EXPECT_EQ(back.meta.loss_history, w.meta.loss_history);
  Rng rng = make_rng(1);
  Matrix x = random_matrix(10, 2, rng);
  std::vector<double> y(10, 0.2);
  y[3] = 0.8;
  EXPECT_EQ(explain_zero_shot(back, x, y), explain_zero_shot(w, x, y));
}

TEST_F(WeightsFileTest, BadFiles) {
  ExplainerWeights w = init_weights(micro_config(), 1);
  save_weights(dir_ / "a.bin", w);
  std::string bytes = read_file(dir_ / "a.bin");
  write_file_atomic(dir_ / "short.bin", bytes.substr(0, bytes.size() - 16));
  EXPECT_THROW(load_weights(dir_ / "short.bin"), FormatError);

  CheckpointFile f = read_checkpoint(dir_ / "a.bin", "XPFNEXPL");
  f.header["format_version"] = 7;
  write_checkpoint(dir_ / "v7.bin", "XPFNEXPL", f);
  try {
    load_weights(dir_ / "v7.bin");
    FAIL();
  } catch (const FormatError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("7"), std::string::npos);
    EXPECT_NE(msg.find("1"), std::string::npos);
  }
}

}  // namespace
}  // namespace xpfn::explainer
