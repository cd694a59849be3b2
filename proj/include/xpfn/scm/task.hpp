// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xpfn/models/base_model.hpp"
#include "xpfn/scm/dag.hpp"
#include "xpfn/shap/shapley.hpp"

namespace xpfn::scm {

struct ScmTask {
  DagSpec dag;
  Matrix samples;  // n x N node values
  std::vector<std::size_t> feature_nodes;
  std::size_t target_node = 0;
  std::vector<double> labels;  // 0/1
  double quantile = 0.5;
  std::uint64_t seed = 0;

  Matrix features() const { return samples.select_columns(feature_nodes); }
};

class TaskRejected : public Error {
 public:
  using Error::Error;
};

struct TaskConfig {
  std::size_t m_max = 10;
  double quantile_lo = 0.2;
  double quantile_hi = 0.8;
};

// Linear-interpolated quantile (numpy's default rule).
double quantile(std::span<const double> values, double q);
// 1 where value > quantile(values, q).
std::vector<double> binarize(std::span<const double> values, double q);

// Picks a target node and m distinct feature nodes, then thresholds the
// target. A single-class result redraws q once, then TaskRejected.
ScmTask select_task(const DagSpec& dag, Matrix samples, Rng& rng, const TaskConfig& config);

struct TripletProvenance {
  std::string estimator;  // "exact" or "permutation"
  std::string base_kind;
  std::uint64_t task_seed = 0;
  std::uint64_t base_seed = 0;
  std::uint64_t shap_seed = 0;
  std::size_t n_permutations = 0;
  std::size_t background_size = 0;
};

struct TrainingTriplet {
  Matrix x;                    // n x m
  std::vector<double> y_hat;   // n
  Matrix phi;                  // n x m
  double base_value = 0.0;
  TripletProvenance provenance;

  // max_i |v + sum_j phi_ij - y_hat_i|
  double max_efficiency_residual() const;
};

struct TripletConfig {
  models::BaseModelConfig base;
  std::size_t exact_max_features = 10;
  std::size_t n_permutations = 200;
  std::size_t background_size = 64;
  double exact_fraction = 0.5;  // chance of the exact estimator when it is feasible
  double train_fraction = 0.5;
  std::size_t min_train_rows = 16;
  std::size_t threads = 1;
};

// Explains `predict` on x: y_hat = predict(x), phi from the hybrid engine
// with the given background.
TrainingTriplet make_triplet(const Matrix& x, const shap::PredictFn& predict, const shap::ShapConfig& shap);

// Trains the base model on a random subset of rows, then explains every row.
// The estimator, its seed and the base-model seed are drawn from `seed`.
// Base-model failures surface as TaskRejected.
TrainingTriplet build_training_triplet(const ScmTask& task, const TripletConfig& config, std::uint64_t seed);

struct GeneratorConfig {
  DagConfig dag;
  TaskConfig task;
  TripletConfig triplet;
  std::size_t min_samples = 64;
  std::size_t max_samples = 256;
  std::size_t max_attempts = 20;
};

// Draws DAG, samples, task and triplet from one seed, retrying rejected
// tasks with derived seeds.
TrainingTriplet generate_triplet(const GeneratorConfig& config, std::uint64_t seed);
ScmTask generate_task(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace xpfn::scm
