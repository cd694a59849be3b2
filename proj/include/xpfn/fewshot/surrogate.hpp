// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xpfn/common/matrix.hpp"
#include "xpfn/models/forest.hpp"
#include "xpfn/models/mlp.hpp"
#include "xpfn/models/scaler.hpp"

namespace xpfn::fewshot {

inline constexpr std::size_t kMaxReferences = 32;

// k labelled rows (x, y_hat, phi).
struct ReferenceSet {
  Matrix x;
  std::vector<double> y_hat;
  Matrix phi;

  std::size_t size() const { return x.rows(); }
  std::size_t feature_count() const { return x.cols(); }
  void validate() const;
};

enum class SurrogateKind { kKnn, kMlpRegressor, kForestRegressor };

const char* to_string(SurrogateKind kind);
SurrogateKind parse_surrogate_kind(const std::string& text);
std::size_t min_references(SurrogateKind kind);

struct SurrogateConfig {
  std::size_t knn_neighbors = 3;
  models::MlpConfig mlp{{32}, 500, 1e-2, models::LrSchedule::kConstant, 0};
  models::ForestConfig forest{100, 8, 1, true, models::MaxFeatures::kAll, 0, 1};
  std::size_t threads = 1;
};

struct KnnState {
  Matrix inputs;  // standardized x || y_hat
  Matrix phi;
  std::size_t neighbors = 1;
};

struct MlpState {
  models::MlpModel model;
  models::ScalerStats target_scaler;
  std::vector<bool> constant_target;  // emitted as target_scaler.mean
};

class Surrogate {
 public:
  using State = std::variant<KnnState, MlpState, models::ForestModel>;

  Surrogate(SurrogateKind kind, std::size_t m, models::ScalerStats input_scaler, State state);

  SurrogateKind kind() const { return kind_; }
  std::size_t feature_count() const { return m_; }
  const models::ScalerStats& input_scaler() const { return input_scaler_; }
  const State& state() const { return state_; }

 private:
  SurrogateKind kind_;
  std::size_t m_;
  models::ScalerStats input_scaler_;
  State state_;
};

// Builds the (x || y_hat) input matrix.
Matrix surrogate_inputs(const Matrix& x, std::span<const double> y_hat);

Surrogate fit_surrogate(SurrogateKind kind, const ReferenceSet& refs, const SurrogateConfig& config, std::uint64_t seed);

Matrix predict_surrogate(const Surrogate& g, const Matrix& x, std::span<const double> y_hat, std::size_t threads = 1);

}  // namespace xpfn::fewshot
