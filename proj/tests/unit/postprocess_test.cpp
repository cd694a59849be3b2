// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "xpfn/common/error.hpp"
#include "xpfn/common/rng.hpp"
#include "xpfn/post/postprocess.hpp"

namespace xpfn::post {
namespace {

// Two-pass reference statistics, kept independent of the library helpers.
double ref_mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

double ref_std(const std::vector<double>& v) {
  double mu = ref_mean(v);
  long double s = 0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(static_cast<double>(s / v.size()));
}

double ref_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = ref_mean(a), mb = ref_mean(b);
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

std::vector<double> flat(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t m, double lo, double hi) {
  Matrix out(n, m);
  for (double& v : out.values()) v = uniform(rng, lo, hi);
  return out;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = uniform(rng, 0.0, 1.0);
  return out;
}

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], tol);
}

TEST(RecenterTest, Arithmetic) {
  Matrix out = recenter(Matrix::from_rows({{1, 3}, {2, 2}}));
  expect_near(out, Matrix::from_rows({{-1, 1}, {0, 0}}), 1e-15);
}

TEST(RecenterTest, ConstantBecomesZero) {
  Matrix out = recenter(Matrix(3, 4, 0.37));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(RecenterTest, ZeroMeanUnchangedAndIdempotent) {
  Rng rng(3);
  Matrix once = recenter(random_matrix(rng, 20, 5, -2, 3));
  EXPECT_NEAR(ref_mean(flat(once)), 0.0, 1e-12);
  expect_near(recenter(once), once, 1e-12);
}

TEST(RecenterTest, EmptyThrows) { EXPECT_THROW(recenter(Matrix()), InvalidArgument); }

TEST(RescaleTest, UnitFactor) {
  // Std(y)=1, m=4, Std(phi)=0.5 gives factor 1.
  std::vector<double> y = {0, 2, 0, 2};
  Matrix phi = Matrix::from_rows({{0.5, -0.5, 0.5, -0.5}, {0.5, -0.5, 0.5, -0.5},
                                  {0.5, -0.5, 0.5, -0.5}, {0.5, -0.5, 0.5, -0.5}});
  expect_near(rescale(phi, y), phi, 1e-15);
}

TEST(RescaleTest, TargetStdAndScaleAbsorption) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t m = 1 + uniform_index(rng, 8);
    Matrix phi = random_matrix(rng, 30, m, -1, 1);
    std::vector<double> y = random_vector(rng, 30);
    Matrix out = rescale(phi, y);
    EXPECT_NEAR(ref_std(flat(out)), ref_std(y) / std::sqrt(double(m)), 1e-12);
    Matrix doubled = phi;
    for (double& v : doubled.values()) v *= 2;
    expect_near(rescale(doubled, y), out, 1e-12);
  }
}

TEST(RescaleTest, DegenerateGuards) {
  Matrix phi = Matrix::from_rows({{1, 2}, {3, 4}});
  Matrix zeros = rescale(phi, std::vector<double>{0.5, 0.5});
  for (double v : zeros.values()) EXPECT_EQ(v, 0.0);
  Matrix flat_phi(2, 2, 0.25);
  EXPECT_EQ(rescale(flat_phi, std::vector<double>{0.0, 1.0}), flat_phi);
  EXPECT_THROW(rescale(phi, std::vector<double>{1.0}), InvalidArgument);
}

TEST(EfficiencyTest, Arithmetic) {
  Matrix phi = Matrix::from_rows({{0.1, 0.05, 0.05}});
  Matrix out = efficiency_correct(phi, std::vector<double>{0.8}, 0.5);
  expect_near(out, Matrix::from_rows({{0.1 + 0.1 / 3, 0.05 + 0.1 / 3, 0.05 + 0.1 / 3}}), 1e-15);
}

TEST(EfficiencyTest, EfficientRowUnchanged) {
  Matrix phi = Matrix::from_rows({{0.25, 0.25}});
  EXPECT_EQ(efficiency_correct(phi, std::vector<double>{1.0}, 0.5), phi);
}

TEST(EfficiencyTest, ResidualVanishesOnRandomInputs) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t m = 1 + uniform_index(rng, 10);
    Matrix phi = random_matrix(rng, 16, m, -3, 3);
    std::vector<double> y = random_vector(rng, 16);
    double v = uniform(rng, -1, 1);
    Matrix out = efficiency_correct(phi, y, v);
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double total = std::accumulate(out.row(i).begin(), out.row(i).end(), 0.0);
      EXPECT_LT(std::abs(y[i] - v - total), 1e-12);
    }
  }
}

TEST(EfficiencyTest, NoFeaturesThrows) {
  EXPECT_THROW(efficiency_correct(Matrix(2, 0), std::vector<double>{1, 2}, 0.0), InvalidArgument);
}

TEST(PipelineTest, AllDisabledIsIdentity) {
  Rng rng(1);
  Matrix phi = random_matrix(rng, 10, 3, -1, 1);
  CorrectionConfig cfg{false, false, false, std::nullopt};
  EXPECT_EQ(full_pipeline(phi, random_vector(rng, 10), cfg), phi);
}

TEST(PipelineTest, FixedPointUnchanged) {
  // Rows sum to y - mean(y), global mean 0, std = Std(y)/sqrt(2).
  std::vector<double> y = {0.0, 1.0};
  Matrix phi = Matrix::from_rows({{-0.5, 0.0}, {0.5, 0.0}});
  ASSERT_NEAR(ref_std(flat(phi)), ref_std(y) / std::sqrt(2.0), 1e-15);
  expect_near(full_pipeline(phi, y), phi, 1e-9);
}

TEST(PipelineTest, RandomInputsSatisfyAllConstraints) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t m = 1 + uniform_index(rng, 10);
    Matrix phi = random_matrix(rng, 40, m, -2, 5);
    std::vector<double> y = random_vector(rng, 40);
    CorrectionConfig partial_cfg;
    partial_cfg.enable_efficiency = false;
    Matrix partial = full_pipeline(phi, y, partial_cfg);
    EXPECT_NEAR(ref_mean(flat(partial)), 0.0, 1e-9);
    EXPECT_NEAR(ref_std(flat(partial)), ref_std(y) / std::sqrt(double(m)), 1e-9);
    Matrix out = full_pipeline(phi, y);
    double v = ref_mean(y);
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double total = std::accumulate(out.row(i).begin(), out.row(i).end(), 0.0);
      EXPECT_LT(std::abs(y[i] - v - total), 1e-12);
    }
  }
}

TEST(PipelineTest, BaseValueOverride) {
  Matrix phi = Matrix::from_rows({{0.0}, {0.0}});
  CorrectionConfig cfg{false, false, true, 0.25};
  Matrix out = full_pipeline(phi, std::vector<double>{1.0, 0.5}, cfg);
  expect_near(out, Matrix::from_rows({{0.75}, {0.25}}), 1e-15);
}

TEST(PipelineTest, PearsonInvariantUnderStatisticalSteps) {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix phi = random_matrix(rng, 25, 4, -1, 2);
    Matrix ref = random_matrix(rng, 25, 4, -1, 1);
    std::vector<double> y = random_vector(rng, 25);
    double before = ref_pearson(flat(phi), flat(ref));
    EXPECT_NEAR(ref_pearson(flat(recenter(phi)), flat(ref)), before, 1e-12);
    EXPECT_NEAR(ref_pearson(flat(rescale(phi, y)), flat(ref)), before, 1e-12);
  }
}

}  // namespace
}  // namespace xpfn::post
