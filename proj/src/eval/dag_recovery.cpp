// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/eval/dag_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "xpfn/common/error.hpp"
#include "xpfn/common/parallel.hpp"
#include "xpfn/common/rng.hpp"
#include "xpfn/post/postprocess.hpp"

namespace xpfn::eval {

EdgeList true_feature_edges(const scm::ScmTask& task) {
  std::vector<std::ptrdiff_t> index(task.dag.node_count, -1);
  for (std::size_t f = 0; f < task.feature_nodes.size(); ++f) {
    index[task.feature_nodes[f]] = static_cast<std::ptrdiff_t>(f);
  }
  EdgeList out;
  for (const auto& e : task.dag.edges) {
    if (index[e.parent] < 0 || index[e.child] < 0) continue;
    out.emplace_back(static_cast<std::size_t>(index[e.parent]), static_cast<std::size_t>(index[e.child]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t graph_edit_distance(const EdgeList& a, const EdgeList& b) {
  std::set<std::pair<std::size_t, std::size_t>> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t d = 0;
  for (const auto& e : sa) d += !sb.count(e);
  for (const auto& e : sb) d += !sa.count(e);
  return d;
}

namespace {

struct Scored {
  double w;
  std::size_t from, to;
};

std::vector<Scored> ranked(const Matrix& weights) {
  if (weights.rows() != weights.cols()) throw InvalidArgument("edge weights must be square");
  std::vector<Scored> all;
  for (std::size_t k = 0; k < weights.rows(); ++k) {
    for (std::size_t j = 0; j < weights.cols(); ++j) {
      if (k != j) all.push_back({weights(k, j), k, j});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.w > b.w; });
  return all;
}

EdgeList to_edges(const std::vector<Scored>& s, std::size_t count) {
  EdgeList out;
  for (std::size_t i = 0; i < std::min(count, s.size()); ++i) out.emplace_back(s[i].from, s[i].to);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

EdgeList top_edges(const Matrix& weights, std::size_t budget) { return to_edges(ranked(weights), budget); }

EdgeList percentile_edges(const Matrix& weights, double percentile) {
  if (!(percentile >= 0.0 && percentile <= 100.0)) throw InvalidArgument("percentile must lie in [0, 100]");
  std::vector<Scored> all = ranked(weights);
  if (all.empty()) return {};
  std::vector<double> w;
  for (const auto& s : all) w.push_back(s.w);
  double cut = scm::quantile(w, percentile / 100.0);
  std::size_t count = 0;
  while (count < all.size() && all[count].w >= cut) ++count;
  return to_edges(all, count);
}

Matrix attribution_edge_weights(const explainer::ExplainerWeights& model, const Matrix& x, std::size_t threads) {
  std::size_t m = x.cols();
  if (m < 2) throw InvalidArgument("DAG recovery needs at least two features, got " + std::to_string(m));
  Matrix weights(m, m);
  parallel_for(m, threads, [&](std::size_t j) {
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < m; ++k)
      if (k != j) others.push_back(k);
    Matrix inputs = x.select_columns(others);
    std::vector<double> target = x.column(j);
    Matrix phi = post::full_pipeline(explainer::explain_zero_shot(model, inputs, target), target);
    for (std::size_t c = 0; c < others.size(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < phi.rows(); ++i) s += std::abs(phi(i, c));
      weights(others[c], j) = s / static_cast<double>(phi.rows());
    }
  });
  return weights;
}

DagRecoveryResult score_edge_weights(const Matrix& weights, const EdgeList& true_edges,
                                     const DagRecoveryConfig& config) {
  if (!std::is_sorted(config.budgets.begin(), config.budgets.end())) {
    throw InvalidArgument("edge budgets must be ascending");
  }
  if (config.random_draws == 0) throw InvalidArgument("random baseline needs at least one draw");
  DagRecoveryResult r;
  r.feature_count = weights.rows();
  r.true_edges = true_edges;
  r.weights = weights;
  r.budgets = config.budgets;
  for (std::size_t b : config.budgets) {
    r.kept.push_back(top_edges(weights, b));
    r.ged.push_back(static_cast<double>(graph_edit_distance(true_edges, r.kept.back())));
  }
  r.random_ged.assign(config.budgets.size(), 0.0);
  for (std::size_t d = 0; d < config.random_draws; ++d) {
    Rng rng(derive_seed(config.seed, {d}));
    Matrix random(weights.rows(), weights.cols());
    for (double& v : random.values()) v = uniform(rng, 0.0, 1.0);
    for (std::size_t b = 0; b < config.budgets.size(); ++b) {
      r.random_ged[b] += static_cast<double>(graph_edit_distance(true_edges, top_edges(random, config.budgets[b])));
    }
  }
  for (double& v : r.random_ged) v /= static_cast<double>(config.random_draws);
  return r;
}

DagRecoveryResult dag_recovery(const explainer::ExplainerWeights& model, const scm::ScmTask& task,
                               const DagRecoveryConfig& config) {
  Matrix weights = attribution_edge_weights(model, task.features(), config.threads);
  return score_edge_weights(weights, true_feature_edges(task), config);
}

nlohmann::json recovery_to_json(const DagRecoveryResult& r) {
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t k = 0; k < r.weights.rows(); ++k) {
    for (std::size_t j = 0; j < r.weights.cols(); ++j) {
      if (k != j) w.push_back({{"from", k}, {"to", j}, {"weight", r.weights(k, j)}});
    }
  }
  nlohmann::json kept = nlohmann::json::array();
  for (const auto& e : r.kept) kept.push_back(e);
  return {{"feature_count", r.feature_count}, {"true_edges", r.true_edges}, {"weighted_edges", w},
          {"budgets", r.budgets},             {"kept_edges", kept},         {"ged", r.ged},
          {"random_ged", r.random_ged}};
}

}  // namespace xpfn::eval
