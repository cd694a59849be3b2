// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "xpfn/common/matrix.hpp"
#include "xpfn/explainer/explainer.hpp"
#include "xpfn/scm/task.hpp"

namespace xpfn::eval {

// Directed edge (from, to) between feature indices.
using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

// DAG edges whose endpoints are both features, in feature-index space. The
// target node is dropped.
EdgeList true_feature_edges(const scm::ScmTask& task);

// Nodes are labelled features, so the edit distance is the size of the
// symmetric difference of the edge sets (unit insert/delete cost).
std::size_t graph_edit_distance(const EdgeList& a, const EdgeList& b);

// The E heaviest off-diagonal entries of an m x m weight matrix, where
// w(k, j) scores k -> j. Ties go to the smaller (k, j). Result sorted.
EdgeList top_edges(const Matrix& weights, std::size_t budget);

// Off-diagonal entries at or above the given percentile (0..100).
EdgeList percentile_edges(const Matrix& weights, double percentile);

// For each feature j, explains x^j from the other features, applies the full
// correction pipeline and stores mean |phi^k| at w(k, j).
Matrix attribution_edge_weights(const explainer::ExplainerWeights& model, const Matrix& x, std::size_t threads = 1);

struct DagRecoveryConfig {
  std::vector<std::size_t> budgets{3, 5, 7};
  std::size_t random_draws = 10;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

struct DagRecoveryResult {
  std::size_t feature_count = 0;
  EdgeList true_edges;
  Matrix weights;
  std::vector<std::size_t> budgets;
  std::vector<EdgeList> kept;
  std::vector<double> ged;
  std::vector<double> random_ged;  // mean over random weight draws
};

DagRecoveryResult dag_recovery(const explainer::ExplainerWeights& model, const scm::ScmTask& task,
                               const DagRecoveryConfig& config);

// Scores given weights against a task's true graph, with the random baseline.
DagRecoveryResult score_edge_weights(const Matrix& weights, const EdgeList& true_edges,
                                     const DagRecoveryConfig& config);

nlohmann::json recovery_to_json(const DagRecoveryResult& r);

}  // namespace xpfn::eval
