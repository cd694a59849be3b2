// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/scm/dag.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace xpfn::scm {

namespace {

// One GNR attachment for node t over candidates [lo, t). link[u] is u's
// link target, if it has one.
std::size_t gnr_target(Rng& rng, std::size_t lo, std::size_t t, double p,
                       const std::vector<std::optional<std::size_t>>& link) {
  std::size_t u = lo + uniform_index(rng, t - lo);
  if (uniform(rng, 0.0, 1.0) < p && link[u]) return *link[u];
  return u;
}

double draw_redirect(Rng& rng, const DagConfig& config) {
  if (config.fixed_redirect) return std::clamp(*config.fixed_redirect, 0.0, 1.0);
  if (config.redirect == RedirectDist::kUniform) return uniform(rng, 0.0, 1.0);
  double p = std::gamma_distribution<double>(config.gamma_shape, config.gamma_scale)(rng);
  return std::clamp(p, 0.0, 1.0);
}

std::vector<double> draw_noise(NoiseDist dist, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  if (dist == NoiseDist::kNormal) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v = normal(rng);
  } else {
    for (double& v : out) v = uniform(rng, -1.0, 1.0);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> DagSpec::parents(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const Edge& e : edges)
    if (e.child == node) out.push_back(e.parent);
  return out;
}

std::vector<std::size_t> DagSpec::children(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const Edge& e : edges)
    if (e.parent == node) out.push_back(e.child);
  return out;
}

DagSpec sample_dag(Rng& rng, const DagConfig& config) {
  if (config.min_nodes < 2 || config.max_nodes > 64 || config.min_nodes > config.max_nodes) {
    throw InvalidArgument("node range [" + std::to_string(config.min_nodes) + ", " +
                          std::to_string(config.max_nodes) + "] must be non-empty and within [2, 64]");
  }
  if (config.max_subgraphs == 0) throw InvalidArgument("max_subgraphs must be at least 1");
  DagSpec dag;
  std::size_t n = config.min_nodes + uniform_index(rng, config.max_nodes - config.min_nodes + 1);
  dag.node_count = n;
  dag.redirect_p = draw_redirect(rng, config);

  // Split nodes into contiguous blocks, one per subgraph.
  std::size_t blocks = 1 + uniform_index(rng, std::min(config.max_subgraphs, n));
  std::vector<std::size_t> starts{0};
  if (blocks > 1) {
    std::vector<std::size_t> cuts = sample_without_replacement(rng, n - 1, blocks - 1);
    for (std::size_t c : cuts) starts.push_back(c + 1);
    std::sort(starts.begin(), starts.end());
  }
  starts.push_back(n);

  std::vector<std::optional<std::size_t>> link(n);
  dag.subgraph_id.assign(n, 0);
  for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
    std::size_t lo = starts[b];
    std::size_t hi = starts[b + 1];
    for (std::size_t t = lo; t < hi; ++t) dag.subgraph_id[t] = b;
    for (std::size_t t = lo + 1; t < hi; ++t) link[t] = gnr_target(rng, lo, t, dag.redirect_p, link);
    // The block's first node joins the earlier nodes by one GNR step.
    if (b > 0 && uniform(rng, 0.0, 1.0) < config.connect_prob) link[lo] = gnr_target(rng, 0, lo, dag.redirect_p, link);
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (link[t]) dag.edges.push_back(Edge{t, *link[t], sample_activation(rng)});
  }
  std::sort(dag.edges.begin(), dag.edges.end(),
            [](const Edge& a, const Edge& b) { return a.child != b.child ? a.child < b.child : a.parent < b.parent; });

  dag.noise.resize(n);
  dag.noise_scale.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    dag.noise[t] = uniform_index(rng, 2) == 0 ? NoiseDist::kNormal : NoiseDist::kUniform;
    dag.noise_scale[t] = dag.parents(t).empty() ? 1.0 : config.noise_scale;
  }
  return dag;
}

std::vector<std::size_t> topological_order(const DagSpec& dag) {
  std::vector<std::size_t> indegree(dag.node_count, 0);
  for (const Edge& e : dag.edges) {
    if (e.parent >= dag.node_count || e.child >= dag.node_count) throw InvalidArgument("edge references missing node");
    ++indegree[e.child];
  }
  std::deque<std::size_t> ready;
  for (std::size_t v = 0; v < dag.node_count; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (const Edge& e : dag.edges)
      if (e.parent == v && --indegree[e.child] == 0) ready.push_back(e.child);
  }
  if (order.size() != dag.node_count) throw InvalidArgument("graph contains a cycle");
  return order;
}

bool is_acyclic(const DagSpec& dag) {
  try {
    topological_order(dag);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

Matrix propagate(const DagSpec& dag, std::size_t n_samples, Rng& rng) {
  if (n_samples < 8) throw InvalidArgument("propagate needs at least 8 samples");
  if (dag.noise.size() != dag.node_count || dag.noise_scale.size() != dag.node_count) {
    throw InvalidArgument("DAG noise description does not match node count");
  }
  Matrix values(n_samples, dag.node_count);
  for (std::size_t v : topological_order(dag)) {
    std::vector<double> signal(n_samples, 0.0);
    for (const Edge& e : dag.edges) {
      if (e.child != v) continue;
      std::vector<double> act = apply_activation(e.activation, values.column(e.parent));
      for (std::size_t i = 0; i < n_samples; ++i) signal[i] += act[i];
    }
    std::vector<double> col;
    double sd = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::vector<double> noise = draw_noise(dag.noise[v], n_samples, rng);
      col = signal;
      for (std::size_t i = 0; i < n_samples; ++i) col[i] += dag.noise_scale[v] * noise[i];
      sd = population_std(col);
      if (sd > 0.0 && std::isfinite(sd)) break;
    }
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw DegenerateTask("node " + std::to_string(v) + " is constant or non-finite after propagation");
    }
    double mu = mean(col);
    for (double& x : col) x = (x - mu) / sd;
    values.set_column(v, col);
  }
  return values;
}

nlohmann::json dag_to_json(const DagSpec& dag) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : dag.edges) {
    edges.push_back({{"parent", e.parent},
                     {"child", e.child},
                     {"activation", to_string(e.activation.kind)},
                     {"param", e.activation.param}});
  }
  std::vector<std::string> noise;
  for (NoiseDist d : dag.noise) noise.emplace_back(d == NoiseDist::kNormal ? "normal" : "uniform");
  return {{"node_count", dag.node_count}, {"edges", edges},           {"noise", noise},
          {"noise_scale", dag.noise_scale}, {"subgraph_id", dag.subgraph_id}, {"redirect_p", dag.redirect_p}};
}

DagSpec dag_from_json(const nlohmann::json& j) {
  DagSpec dag;
  dag.node_count = j.at("node_count").get<std::size_t>();
  for (const auto& e : j.at("edges")) {
    dag.edges.push_back(Edge{e.at("parent").get<std::size_t>(), e.at("child").get<std::size_t>(),
                             EdgeActivation{parse_activation(e.at("activation").get<std::string>()),
                                            e.at("param").get<double>()}});
  }
  for (const auto& s : j.at("noise")) dag.noise.push_back(s.get<std::string>() == "normal" ? NoiseDist::kNormal : NoiseDist::kUniform);
  dag.noise_scale = j.at("noise_scale").get<std::vector<double>>();
  dag.subgraph_id = j.at("subgraph_id").get<std::vector<std::size_t>>();
  dag.redirect_p = j.at("redirect_p").get<double>();
  return dag;
}

}  // namespace xpfn::scm
