// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "xpfn/autodiff/graph.hpp"
#include "xpfn/common/matrix.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::explainer {

// K + 1 edges: equal-width buckets over [-inner, inner] plus one tail
// bucket on each side reaching to +-outer. Needs K >= 3.
std::vector<double> default_bucket_edges(std::size_t k = 32, double inner = 4.0, double outer = 4.5);
std::vector<double> bucket_centers(std::span<const double> edges);
// Half-open [e_k, e_k+1); values outside the edges clamp to the tail buckets.
std::size_t bucket_index(std::span<const double> edges, double value);

struct ExplainerConfig {
  std::size_t embed_dim = 64;
  std::size_t n_layers = 3;
  std::size_t n_heads = 4;
  std::size_t ffn_dim = 128;
  std::vector<double> bucket_edges = default_bucket_edges();
  std::size_t max_features = 10;
  std::size_t max_context_rows = 512;

  // Training.
  double lr_min = 1e-7;
  double lr_max = 1e-4;
  std::size_t steps = 1000;
  std::size_t restarts = 3;
  std::size_t max_train_rows = 128;  // rows subsampled from each task per step
  std::size_t smooth_window = 50;
  double clip_norm = 1.0;            // global gradient norm cap; 0 disables
  std::uint64_t seed = 0;

  std::size_t bucket_count() const { return bucket_edges.size() - 1; }
  std::size_t slot_count() const { return max_features + 1; }
  void validate() const;
};

nlohmann::json config_to_json(const ExplainerConfig& config);
ExplainerConfig config_from_json(const nlohmann::json& j);

struct TrainingMetadata {
  std::size_t steps = 0;
  std::size_t chosen_restart = 0;
  double peak_lr = 0.0;
  double initial_loss = 0.0;  // smoothed loss at the start of the chosen restart
  double final_loss = 0.0;    // smoothed loss at its end
  std::vector<double> restart_final_losses;
  std::vector<double> loss_history;  // per step, chosen restart
};

struct ExplainerWeights {
  ExplainerConfig config;
  ad::TensorMap params;
  TrainingMetadata meta;

  std::size_t parameter_count() const;
};

ExplainerWeights init_weights(const ExplainerConfig& config, std::uint64_t seed);

// Z-score statistics for the feature columns and the prediction column,
// fitted on the context rows. Zero spread maps to std 1.
struct InputStats {
  std::vector<double> x_mean;
  std::vector<double> x_std;
  double y_mean = 0.0;
  double y_std = 1.0;
};

InputStats fit_input_stats(const Matrix& x, std::span<const double> y_hat);

// One row per instance: [y_hat, x^j, remaining features in order, 0 ...],
// width max_features + 1. Inputs are standardized with `stats` when given.
Matrix slot_matrix(const Matrix& x, std::span<const double> y_hat, std::size_t feature, std::size_t max_features,
                   const InputStats* stats = nullptr);

// Builds the token embeddings of a slot matrix with m active features:
// slots projected to d dims plus the mean learned embedding of the active
// slot positions.
ad::NodeId build_tokens(ad::Graph& g, const ExplainerConfig& config, ad::NodeId slots, std::size_t m);

// Full network: slots (T x S) -> bucket probabilities (T x K).
ad::NodeId build_network(ad::Graph& g, const ExplainerConfig& config, ad::NodeId slots, std::size_t m);

// Per-row bucket probabilities for the query rows when explaining `feature`.
// Context rows come first in the attention sequence, queries last. An empty
// x_ref makes the queries their own context.
Matrix forward(const ExplainerWeights& w, const Matrix& x, std::span<const double> y_hat, std::size_t feature,
               const Matrix& x_ref, std::span<const double> y_ref);

double point_estimate(std::span<const double> probs, std::span<const double> centers);

// -sum_t log max(p_t[k*_t], 1e-12) over rows of `probs` (T x K).
double nlpd_loss(const Matrix& probs, std::span<const double> targets, std::span<const double> edges);

struct StandardizationStats {
  double mean = 0.0;
  double std = 1.0;
};

// Global standardization over all n*m entries.
Matrix standardize_targets(const Matrix& phi, StandardizationStats* stats = nullptr);

// Mean per-entry NLPD loss graph for one feature pass; used by training
// and by gradient checks. The one-hot targets enter as a constant.
ad::NodeId build_loss(ad::Graph& g, const ExplainerConfig& config, ad::NodeId slots, std::size_t m,
                      std::span<const double> targets);

struct TrainingTask {
  Matrix x;
  std::vector<double> y_hat;
  Matrix phi;
};

using TaskSource = std::function<TrainingTask(Rng&)>;

// Restart r samples a peak lr log-uniformly from [lr_min, lr_max] and runs
// `steps` Adam updates with cosine annealing; all restarts share the
// initialization and task stream. Returns the restart with the lowest final
// smoothed loss. A non-finite loss aborts only that restart.
ExplainerWeights train(const TaskSource& source, const ExplainerConfig& config);

// Mean per-entry NLPD of `weights` on the given tasks (self-context).
double mean_nlpd(const ExplainerWeights& weights, std::span<const TrainingTask> tasks);

// n x m standardized-unit attributions. Without a reference set, X is its
// own context.
Matrix explain_zero_shot(const ExplainerWeights& w, const Matrix& x, std::span<const double> y_hat,
                         std::size_t threads = 1);
Matrix explain_zero_shot(const ExplainerWeights& w, const Matrix& x, std::span<const double> y_hat,
                         const Matrix& x_ref, std::span<const double> y_ref, std::size_t threads = 1);

inline constexpr int kWeightsFormatVersion = 1;
void save_weights(const std::filesystem::path& path, const ExplainerWeights& w);
ExplainerWeights load_weights(const std::filesystem::path& path);

}  // namespace xpfn::explainer
