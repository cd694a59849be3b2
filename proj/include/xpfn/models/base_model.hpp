// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xpfn/models/forest.hpp"
#include "xpfn/models/mlp.hpp"
#include "xpfn/models/scaler.hpp"

namespace xpfn::models {

enum class BaseModelKind { kMlp, kForest };

const char* to_string(BaseModelKind kind);
BaseModelKind parse_base_model_kind(const std::string& text);

struct BaseModelConfig {
  BaseModelKind kind = BaseModelKind::kMlp;
  MlpConfig mlp;
  ForestConfig forest;
  bool standardize = false;  // z-score inputs before the model
};

// A binary classifier f^b whose explained output is the class-1 probability.
class BaseModel {
 public:
  BaseModel() = default;
  BaseModel(std::variant<MlpModel, ForestModel> model, std::optional<ScalerStats> scaler);

  std::vector<double> predict(const Matrix& x) const;
  std::size_t input_dim() const;
  BaseModelKind kind() const;

  const std::variant<MlpModel, ForestModel>& model() const { return model_; }
  const std::optional<ScalerStats>& scaler() const { return scaler_; }

 private:
  std::variant<MlpModel, ForestModel> model_;
  std::optional<ScalerStats> scaler_;
};

BaseModel train_base_model(const Matrix& x, std::span<const double> y, const BaseModelConfig& config);

inline constexpr int kBaseModelFormatVersion = 1;
void save_base_model(const std::filesystem::path& path, const BaseModel& model);
BaseModel load_base_model(const std::filesystem::path& path);

}  // namespace xpfn::models
