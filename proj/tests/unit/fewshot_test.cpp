// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "xpfn/common/error.hpp"
#include "xpfn/common/rng.hpp"
#include "xpfn/fewshot/surrogate.hpp"

namespace xpfn::fewshot {
namespace {

// Linear attribution map phi_j = w_j * (x_j - 0.5), y = 0.5 + sum phi.
struct Synthetic {
  Matrix x;
  std::vector<double> y;
  Matrix phi;
};

Synthetic linear_task(Rng& rng, std::size_t n, const std::vector<double>& w) {
  Synthetic s{Matrix(n, w.size()), std::vector<double>(n), Matrix(n, w.size())};
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.5;
    for (std::size_t j = 0; j < w.size(); ++j) {
      s.x(i, j) = uniform(rng, 0, 1);
      s.phi(i, j) = w[j] * (s.x(i, j) - 0.5);
      total += s.phi(i, j);
    }
    s.y[i] = total;
  }
  return s;
}

ReferenceSet head(const Synthetic& s, std::size_t k) {
  std::vector<std::size_t> rows(k);
  for (std::size_t i = 0; i < k; ++i) rows[i] = i;
  return {s.x.select_rows(rows), std::vector<double>(s.y.begin(), s.y.begin() + k), s.phi.select_rows(rows)};
}

double ref_pearson(std::span<const double> a, std::span<const double> b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

TEST(SurrogateTest, KnnExactMatchReturnsReferencePhi) {
  Rng rng(1);
  Synthetic s = linear_task(rng, 8, {1.0, -2.0, 0.5});
  Surrogate g = fit_surrogate(SurrogateKind::kKnn, head(s, 8), {}, 0);
  Matrix out = predict_surrogate(g, s.x, s.y);
  EXPECT_EQ(out, s.phi);
}

TEST(SurrogateTest, IdenticalReferencesGiveCommonPhi) {
  ReferenceSet refs{Matrix::from_rows({{0.2, 0.4}, {0.2, 0.4}}), {0.7, 0.7}, Matrix::from_rows({{0.1, -0.3}, {0.1, -0.3}})};
  Rng rng(2);
  Synthetic q = linear_task(rng, 5, {1.0, 1.0});
  Matrix knn_out = predict_surrogate(fit_surrogate(SurrogateKind::kKnn, refs, {}, 3), q.x, q.y);
  for (std::size_t i = 0; i < knn_out.rows(); ++i) {
    EXPECT_EQ(knn_out(i, 0), 0.1);
    EXPECT_EQ(knn_out(i, 1), -0.3);
  }
  // Tree and leaf averaging round in the last bit.
  for (SurrogateKind kind : {SurrogateKind::kMlpRegressor, SurrogateKind::kForestRegressor}) {
    Matrix out = predict_surrogate(fit_surrogate(kind, refs, {}, 3), q.x, q.y);
    for (std::size_t i = 0; i < out.rows(); ++i) {
      EXPECT_NEAR(out(i, 0), 0.1, 1e-12);
      EXPECT_NEAR(out(i, 1), -0.3, 1e-12);
    }
  }
}

TEST(SurrogateTest, MinimumReferenceCounts) {
  Rng rng(4);
  Synthetic s = linear_task(rng, 40, {1.0, 2.0});
  EXPECT_NO_THROW(fit_surrogate(SurrogateKind::kKnn, head(s, 1), {}, 0));
  EXPECT_THROW(fit_surrogate(SurrogateKind::kMlpRegressor, head(s, 1), {}, 0), InvalidArgument);
  EXPECT_THROW(fit_surrogate(SurrogateKind::kForestRegressor, head(s, 1), {}, 0), InvalidArgument);
  EXPECT_THROW(fit_surrogate(SurrogateKind::kKnn, head(s, 33), {}, 0), InvalidArgument);
  EXPECT_NO_THROW(fit_surrogate(SurrogateKind::kKnn, head(s, 32), {}, 0));
}

TEST(SurrogateTest, ShapeDeterminismAndMismatch) {
  Rng rng(5);
  Synthetic s = linear_task(rng, 20, {1.0, -1.0, 2.0});
  for (SurrogateKind kind : {SurrogateKind::kKnn, SurrogateKind::kMlpRegressor, SurrogateKind::kForestRegressor}) {
    Surrogate g = fit_surrogate(kind, head(s, 6), {}, 7);
    Matrix q = Matrix::from_rows({{0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}});
    Matrix out = predict_surrogate(g, q, std::vector<double>{0.4, 0.4}, 2);
    ASSERT_EQ(out.rows(), 2u);
    ASSERT_EQ(out.cols(), 3u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out(0, j), out(1, j));
    EXPECT_EQ(out, predict_surrogate(g, q, std::vector<double>{0.4, 0.4}, 1));
    EXPECT_THROW(predict_surrogate(g, Matrix(1, 2), std::vector<double>{0.0}), InvalidArgument);
  }
}

TEST(SurrogateTest, KnnWithinNeighborRange) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Synthetic refs = linear_task(rng, 10, {1.0, -2.0, 3.0, 0.5});
    Synthetic q = linear_task(rng, 30, {1.0, -2.0, 3.0, 0.5});
    Matrix out = predict_surrogate(fit_surrogate(SurrogateKind::kKnn, head(refs, 10), {}, 0), q.x, q.y);
    for (std::size_t j = 0; j < 4; ++j) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t r = 0; r < 10; ++r) lo = std::min(lo, refs.phi(r, j)), hi = std::max(hi, refs.phi(r, j));
      for (std::size_t i = 0; i < out.rows(); ++i) {
        EXPECT_GE(out(i, j), lo - 1e-12);
        EXPECT_LE(out(i, j), hi + 1e-12);
      }
    }
  }
}

TEST(SurrogateTest, KnnTrainingFitErrorDoesNotDecreaseFromTwoToTen) {
  Rng rng(8);
  double err2 = 0, err10 = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Synthetic s = linear_task(rng, 10, {1.0, -1.5, 0.7});
    for (std::size_t k : {2u, 10u}) {
      ReferenceSet refs = head(s, k);
      Matrix out = predict_surrogate(fit_surrogate(SurrogateKind::kKnn, refs, {}, 0), refs.x, refs.y_hat);
      double e = 0;
      for (std::size_t i = 0; i < out.values().size(); ++i) e += std::abs(out.values()[i] - refs.phi.values()[i]);
      (k == 2 ? err2 : err10) += e / out.values().size();
    }
  }
  EXPECT_GE(err10 / 20, err2 / 20);
}

TEST(SurrogateTest, ForestWithTenBeatsKnnWithOne) {
  Rng rng(10);
  double forest = 0, knn = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Synthetic s = linear_task(rng, 60, {1.0, -2.0, 0.5, 1.5});
    Synthetic test = linear_task(rng, 50, {1.0, -2.0, 0.5, 1.5});
    Matrix pf = predict_surrogate(fit_surrogate(SurrogateKind::kForestRegressor, head(s, 10), {}, seed), test.x, test.y);
    Matrix pk = predict_surrogate(fit_surrogate(SurrogateKind::kKnn, head(s, 1), {}, seed), test.x, test.y);
    forest += ref_pearson(pf.values(), test.phi.values());
    knn += ref_pearson(pk.values(), test.phi.values());
  }
  EXPECT_GT(forest / 20, knn / 20);
}

TEST(SurrogateTest, ParseKind) {
  EXPECT_EQ(parse_surrogate_kind("knn"), SurrogateKind::kKnn);
  EXPECT_EQ(parse_surrogate_kind("mlp_regressor"), SurrogateKind::kMlpRegressor);
  EXPECT_EQ(parse_surrogate_kind("rf"), SurrogateKind::kForestRegressor);
  EXPECT_THROW(parse_surrogate_kind("tabpfn"), InvalidArgument);
}

}  // namespace
}  // namespace xpfn::fewshot
