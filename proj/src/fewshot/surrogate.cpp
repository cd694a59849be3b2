// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/fewshot/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xpfn/common/error.hpp"
#include "xpfn/common/parallel.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::fewshot {

void ReferenceSet::validate() const {
  if (size() == 0 || size() > kMaxReferences) {
    throw InvalidArgument("reference set must hold between 1 and " + std::to_string(kMaxReferences) +
                          " rows, got " + std::to_string(size()));
  }
  if (y_hat.size() != size() || phi.rows() != size()) {
    throw InvalidArgument("reference set: x, y_hat and phi row counts differ");
  }
  if (phi.cols() != feature_count() || feature_count() == 0) {
    throw InvalidArgument("reference set: phi has " + std::to_string(phi.cols()) + " columns but x has " +
                          std::to_string(feature_count()));
  }
}

const char* to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kKnn: return "knn";
    case SurrogateKind::kMlpRegressor: return "mlp";
    case SurrogateKind::kForestRegressor: return "forest";
  }
  return "?";
}

SurrogateKind parse_surrogate_kind(const std::string& text) {
  if (text == "knn") return SurrogateKind::kKnn;
  if (text == "mlp" || text == "mlp_regressor") return SurrogateKind::kMlpRegressor;
  if (text == "forest" || text == "forest_regressor" || text == "rf") return SurrogateKind::kForestRegressor;
  throw InvalidArgument("unknown surrogate kind '" + text + "' (expected knn, mlp or forest)");
}

std::size_t min_references(SurrogateKind kind) { return kind == SurrogateKind::kKnn ? 1 : 2; }

Surrogate::Surrogate(SurrogateKind kind, std::size_t m, models::ScalerStats input_scaler, State state)
    : kind_(kind), m_(m), input_scaler_(std::move(input_scaler)), state_(std::move(state)) {}

Matrix surrogate_inputs(const Matrix& x, std::span<const double> y_hat) {
  if (y_hat.size() != x.rows()) {
    throw InvalidArgument("surrogate inputs: " + std::to_string(x.rows()) + " rows but " +
                          std::to_string(y_hat.size()) + " predictions");
  }
  Matrix out(x.rows(), x.cols() + 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
    out(i, x.cols()) = y_hat[i];
  }
  return out;
}

namespace {

// A single row has no spread; centre on it with unit scale.
models::ScalerStats fit_or_identity(const Matrix& m) {
  if (m.rows() >= 2) return models::fit_scaler(m);
  models::ScalerStats s;
  s.mean.assign(m.row(0).begin(), m.row(0).end());
  s.std.assign(m.cols(), 1.0);
  return s;
}

void knn_predict_row(const KnnState& knn, std::span<const double> q, std::span<double> out) {
  std::size_t k = knn.inputs.rows();
  std::vector<double> dist(k);
  for (std::size_t r = 0; r < k; ++r) {
    double s = 0.0;
    auto row = knn.inputs.row(r);
    for (std::size_t c = 0; c < q.size(); ++c) s += (row[c] - q[c]) * (row[c] - q[c]);
    dist[r] = std::sqrt(s);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::size_t nn = std::min(knn.neighbors, k);

  std::fill(out.begin(), out.end(), 0.0);
  if (dist[order[0]] == 0.0) {
    // Average over all exact matches so duplicated references stay symmetric.
    std::size_t hits = 0;
    for (std::size_t t = 0; t < k && dist[order[t]] == 0.0; ++t, ++hits) {
      auto p = knn.phi.row(order[t]);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += p[j];
    }
    for (double& v : out) v /= static_cast<double>(hits);
    return;
  }
  // Offsets from the nearest row, so identical neighbours reproduce it bit for bit.
  auto anchor = knn.phi.row(order[0]);
  double wsum = 0.0;
  for (std::size_t t = 0; t < nn; ++t) {
    double w = 1.0 / dist[order[t]];
    wsum += w;
    auto p = knn.phi.row(order[t]);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * (p[j] - anchor[j]);
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = anchor[j] + out[j] / wsum;
}

}  // namespace

Surrogate fit_surrogate(SurrogateKind kind, const ReferenceSet& refs, const SurrogateConfig& config,
                        std::uint64_t seed) {
  refs.validate();
  if (refs.size() < min_references(kind)) {
    throw InvalidArgument(std::string(to_string(kind)) + " surrogate needs at least " +
                          std::to_string(min_references(kind)) + " references, got " + std::to_string(refs.size()));
  }
  std::size_t m = refs.feature_count();
  Matrix raw = surrogate_inputs(refs.x, refs.y_hat);
  models::ScalerStats scaler = fit_or_identity(raw);
  Matrix inputs = models::transform(scaler, raw);

  switch (kind) {
    case SurrogateKind::kKnn: {
      if (config.knn_neighbors == 0) throw InvalidArgument("knn_neighbors must be positive");
      KnnState knn{inputs, refs.phi, std::min(config.knn_neighbors, refs.size())};
      return Surrogate(kind, m, scaler, std::move(knn));
    }
    case SurrogateKind::kMlpRegressor: {
      models::MlpConfig cfg = config.mlp;
      cfg.seed = derive_seed(seed, {0});
      MlpState st;
      st.target_scaler = models::fit_scaler(refs.phi);
      for (std::size_t j = 0; j < m; ++j) st.constant_target.push_back(all_equal(refs.phi.column(j)));
      st.model = models::train_mlp_regressor(inputs, models::transform(st.target_scaler, refs.phi), cfg);
      return Surrogate(kind, m, scaler, std::move(st));
    }
    case SurrogateKind::kForestRegressor: {
      models::ForestConfig cfg = config.forest;
      cfg.seed = derive_seed(seed, {1});
      return Surrogate(kind, m, scaler, models::train_forest_regressor(inputs, refs.phi, cfg));
    }
  }
  throw InvalidArgument("unhandled surrogate kind");
}

Matrix predict_surrogate(const Surrogate& g, const Matrix& x, std::span<const double> y_hat, std::size_t threads) {
  if (x.cols() != g.feature_count()) {
    throw InvalidArgument("surrogate was fitted on " + std::to_string(g.feature_count()) + " features, got " +
                          std::to_string(x.cols()));
  }
  Matrix inputs = models::transform(g.input_scaler(), surrogate_inputs(x, y_hat));
  if (const auto* knn = std::get_if<KnnState>(&g.state())) {
    Matrix out(x.rows(), g.feature_count());
    parallel_for(x.rows(), threads, [&](std::size_t i) { knn_predict_row(*knn, inputs.row(i), out.row(i)); });
    return out;
  }
  if (const auto* mlp = std::get_if<MlpState>(&g.state())) {
    Matrix out = models::inverse_transform(mlp->target_scaler, models::predict_outputs(mlp->model, inputs));
    for (std::size_t j = 0; j < out.cols(); ++j) {
      if (!mlp->constant_target[j]) continue;
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) = mlp->target_scaler.mean[j];
    }
    return out;
  }
  return models::predict_outputs(std::get<models::ForestModel>(g.state()), inputs);
}

}  // namespace xpfn::fewshot
