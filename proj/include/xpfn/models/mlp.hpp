// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xpfn/common/error.hpp"
#include "xpfn/common/matrix.hpp"

namespace xpfn::models {

enum class MlpOutput {
  kSigmoid,   // binary classifier, trained with cross-entropy
  kIdentity,  // multi-output regressor, trained with squared error
};

enum class LrSchedule {
  kConstant,
  kInverseSqrt,  // lr_t = lr_0 / sqrt(t + 1), t = epoch
};

struct MlpConfig {
  std::vector<std::size_t> hidden{100};
  std::size_t epochs = 2000;
  double learning_rate = 1e-4;
  LrSchedule schedule = LrSchedule::kInverseSqrt;
  std::uint64_t seed = 0;
};

// Fully connected ReLU network. weights[l] is [in x out] for layer l.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  MlpOutput output = MlpOutput::kSigmoid;
  std::vector<double> loss_history;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Glorot-uniform weights, zero biases.
MlpModel init_mlp(std::vector<std::size_t> layer_sizes, MlpOutput output, std::uint64_t seed);

// Full-batch Adam on binary cross-entropy. Labels must be 0/1 with both
// classes present and n >= 16.
MlpModel train_mlp(const Matrix& x, std::span<const double> y, const MlpConfig& config);

// Full-batch Adam on mean squared error over every output.
MlpModel train_mlp_regressor(const Matrix& x, const Matrix& y, const MlpConfig& config);

// First output per row (a probability for classifiers).
std::vector<double> predict(const MlpModel& model, const Matrix& x);
Matrix predict_outputs(const MlpModel& model, const Matrix& x);

}  // namespace xpfn::models
