// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xpfn/common/matrix.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::models {

enum class SplitCriterion {
  kGini,  // binary classification, leaf value = class-1 frequency
  kMse,   // multi-output regression, leaf value = mean target row
};

struct TreeConfig {
  std::size_t max_depth = 8;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // candidates per split; 0 means all
  SplitCriterion criterion = SplitCriterion::kGini;
};

// CART tree stored as flat arrays. feature[i] < 0 marks a leaf.
struct DecisionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;  // output_dim values per node
  std::size_t output_dim = 1;

  std::size_t node_count() const { return feature.size(); }
  std::span<const double> leaf_value(std::span<const double> row) const;
};

// Grows one tree on the given rows (duplicates allowed, e.g. a bootstrap).
DecisionTree fit_tree(const Matrix& x, const Matrix& y, std::span<const std::size_t> rows, const TreeConfig& config,
                      Rng& rng);

enum class MaxFeatures { kSqrt, kAll };

struct ForestConfig {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 8;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  MaxFeatures max_features = MaxFeatures::kSqrt;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t input_dim = 0;
  std::size_t output_dim = 1;
  SplitCriterion criterion = SplitCriterion::kGini;
};

// Bagged Gini trees; tree t uses the stream derive_seed(seed, {t}) so the
// result does not depend on the thread count.
ForestModel train_forest(const Matrix& x, std::span<const double> y, const ForestConfig& config);
ForestModel train_forest_regressor(const Matrix& x, const Matrix& y, const ForestConfig& config);

// Mean leaf class-1 frequency per row.
std::vector<double> predict_proba(const ForestModel& model, const Matrix& x);
Matrix predict_outputs(const ForestModel& model, const Matrix& x);

}  // namespace xpfn::models
