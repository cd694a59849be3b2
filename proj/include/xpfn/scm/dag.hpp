// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xpfn/common/error.hpp"
#include "xpfn/common/matrix.hpp"
#include "xpfn/common/rng.hpp"
#include "xpfn/scm/activation.hpp"

namespace xpfn::scm {

enum class NoiseDist { kNormal, kUniform };

// A causal edge: the parent's activated value feeds the child.
struct Edge {
  std::size_t parent = 0;
  std::size_t child = 0;
  EdgeActivation activation;

  bool operator==(const Edge&) const = default;
};

struct DagSpec {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::vector<NoiseDist> noise;
  std::vector<double> noise_scale;      // per node; roots use 1
  std::vector<std::size_t> subgraph_id;
  double redirect_p = 0.0;

  std::vector<std::size_t> parents(std::size_t node) const;
  std::vector<std::size_t> children(std::size_t node) const;
};

enum class RedirectDist { kGamma, kUniform };

struct DagConfig {
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 10;
  RedirectDist redirect = RedirectDist::kGamma;
  double gamma_shape = 2.0;
  double gamma_scale = 0.15;
  std::optional<double> fixed_redirect;  // overrides the distribution
  std::size_t max_subgraphs = 1;         // subgraph count ~ U{1..max}
  double connect_prob = 0.5;             // chance a later subgraph is linked in
  double noise_scale = 0.1;              // noise multiplier on non-root nodes
};

// Growing network with redirection. Each new node t picks an existing node u
// uniformly; with probability p it links to u's own link target instead
// (to u when u has none). The link t -> target is a causal edge
// parent t -> child target, so early nodes collect parents.
DagSpec sample_dag(Rng& rng, const DagConfig& config);

// Kahn order, parents before children. Throws InvalidArgument on a cycle.
std::vector<std::size_t> topological_order(const DagSpec& dag);
bool is_acyclic(const DagSpec& dag);

class DegenerateTask : public Error {
 public:
  using Error::Error;
};

// n x N node values. Every column is standardized (population std). A
// constant column gets one fresh noise draw, then DegenerateTask.
Matrix propagate(const DagSpec& dag, std::size_t n_samples, Rng& rng);

nlohmann::json dag_to_json(const DagSpec& dag);
DagSpec dag_from_json(const nlohmann::json& j);

}  // namespace xpfn::scm
