// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xpfn/common/matrix.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::shap {

// Batch predictor. Must be callable concurrently from several threads.
using PredictFn = std::function<std::vector<double>(const Matrix&)>;

enum class ShapMode { kExact, kPermutation, kHybrid };

const char* to_string(ShapMode mode);
ShapMode parse_shap_mode(const std::string& text);

struct ShapConfig {
  ShapMode mode = ShapMode::kHybrid;
  std::size_t exact_max_features = 10;
  std::size_t n_permutations = 200;
  Matrix background;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ShapResult {
  Matrix phi;                   // n x m
  double base_value = 0.0;      // mean prediction over the background
  std::string estimator;        // "exact" or "permutation"
  std::vector<double> residuals;  // f(x) - v - sum_j phi_j per instance
};

// |S|! (m - |S| - 1)! / m!
double shapley_weight(std::size_t subset_size, std::size_t m);

// Interventional value of coalition S: background rows with the features in
// S overwritten by x, predicted and averaged.
double coalition_value(const PredictFn& predict, std::span<const double> x, std::span<const std::size_t> subset,
                       const Matrix& background);

// Values of all 2^m coalitions, indexed by bitmask (bit j set = feature j in S).
std::vector<double> all_coalition_values(const PredictFn& predict, std::span<const double> x,
                                         const Matrix& background);

std::vector<double> exact_shapley(const PredictFn& predict, std::span<const double> x, const Matrix& background,
                                  std::size_t exact_max_features = 10);

// Monte Carlo over feature orderings. Orderings are drawn in antithetic
// pairs (pi, reversed pi); an odd count leaves the last one unpaired.
std::vector<double> permutation_shapley(const PredictFn& predict, std::span<const double> x,
                                        const Matrix& background, std::size_t n_permutations, Rng& rng);

// Instance i uses the stream derive_seed(seed, {i}).
ShapResult hybrid_shapley(const PredictFn& predict, const Matrix& x, const ShapConfig& config);

}  // namespace xpfn::shap
