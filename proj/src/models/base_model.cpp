// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/models/base_model.hpp"

#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/error.hpp"

namespace xpfn::models {

namespace {

constexpr std::string_view kMagic = "XPFNBASE";

struct PayloadReader {
  const std::vector<double>& data;
  std::size_t pos = 0;

  double next() {
    if (pos >= data.size()) throw FormatError("base model checkpoint payload is truncated");
    return data[pos++];
  }
  std::size_t next_size() { return static_cast<std::size_t>(next()); }
  std::vector<double> take(std::size_t n) {
    if (data.size() - pos < n) throw FormatError("base model checkpoint payload is truncated");
    std::vector<double> out(data.begin() + static_cast<std::ptrdiff_t>(pos),
                            data.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return out;
  }
};

void write_mlp(const MlpModel& mlp, nlohmann::json& header, std::vector<double>& payload) {
  header["layer_sizes"] = mlp.layer_sizes;
  header["output"] = mlp.output == MlpOutput::kSigmoid ? "sigmoid" : "identity";
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    payload.insert(payload.end(), mlp.weights[l].storage().begin(), mlp.weights[l].storage().end());
    payload.insert(payload.end(), mlp.biases[l].begin(), mlp.biases[l].end());
  }
}

MlpModel read_mlp(const nlohmann::json& header, PayloadReader& in) {
  MlpModel mlp;
  mlp.layer_sizes = header.at("layer_sizes").get<std::vector<std::size_t>>();
  if (mlp.layer_sizes.size() < 2) throw FormatError("base model checkpoint: bad layer_sizes");
  mlp.output = header.at("output").get<std::string>() == "sigmoid" ? MlpOutput::kSigmoid : MlpOutput::kIdentity;
  for (std::size_t l = 0; l + 1 < mlp.layer_sizes.size(); ++l) {
    std::size_t rows = mlp.layer_sizes[l];
    std::size_t cols = mlp.layer_sizes[l + 1];
    mlp.weights.emplace_back(rows, cols, in.take(rows * cols));
    mlp.biases.push_back(in.take(cols));
  }
  return mlp;
}

// Per tree: node count, then per node feature, threshold, left, right, values.
void write_forest(const ForestModel& forest, nlohmann::json& header, std::vector<double>& payload) {
  header["n_estimators"] = forest.trees.size();
  header["input_dim"] = forest.input_dim;
  header["output_dim"] = forest.output_dim;
  header["criterion"] = forest.criterion == SplitCriterion::kGini ? "gini" : "mse";
  header["tree_seeds"] = forest.tree_seeds;
  for (const DecisionTree& tree : forest.trees) {
    payload.push_back(static_cast<double>(tree.node_count()));
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
      payload.push_back(tree.feature[i]);
      payload.push_back(tree.threshold[i]);
      payload.push_back(tree.left[i]);
      payload.push_back(tree.right[i]);
      for (std::size_t k = 0; k < tree.output_dim; ++k) payload.push_back(tree.value[i * tree.output_dim + k]);
    }
  }
}

ForestModel read_forest(const nlohmann::json& header, PayloadReader& in) {
  ForestModel forest;
  forest.input_dim = header.at("input_dim").get<std::size_t>();
  forest.output_dim = header.at("output_dim").get<std::size_t>();
  forest.criterion = header.at("criterion").get<std::string>() == "gini" ? SplitCriterion::kGini : SplitCriterion::kMse;
  forest.tree_seeds = header.at("tree_seeds").get<std::vector<std::uint64_t>>();
  std::size_t n_trees = header.at("n_estimators").get<std::size_t>();
  for (std::size_t t = 0; t < n_trees; ++t) {
    DecisionTree tree;
    tree.output_dim = forest.output_dim;
    std::size_t nodes = in.next_size();
    for (std::size_t i = 0; i < nodes; ++i) {
      tree.feature.push_back(static_cast<int>(in.next()));
      tree.threshold.push_back(in.next());
      tree.left.push_back(static_cast<int>(in.next()));
      tree.right.push_back(static_cast<int>(in.next()));
      std::vector<double> v = in.take(forest.output_dim);
      tree.value.insert(tree.value.end(), v.begin(), v.end());
      int f = tree.feature.back();
      if (f >= static_cast<int>(forest.input_dim)) throw FormatError("base model checkpoint: bad split feature");
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      if (tree.feature[i] < 0) continue;
      if (tree.left[i] <= static_cast<int>(i) || tree.right[i] <= static_cast<int>(i) ||
          tree.left[i] >= static_cast<int>(nodes) || tree.right[i] >= static_cast<int>(nodes)) {
        throw FormatError("base model checkpoint: bad tree links");
      }
    }
    if (nodes == 0) throw FormatError("base model checkpoint: empty tree");
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

}  // namespace

const char* to_string(BaseModelKind kind) { return kind == BaseModelKind::kMlp ? "mlp" : "forest"; }

BaseModelKind parse_base_model_kind(const std::string& text) {
  if (text == "mlp") return BaseModelKind::kMlp;
  if (text == "forest" || text == "rf") return BaseModelKind::kForest;
  throw InvalidArgument("unknown base model kind '" + text + "' (expected mlp or forest)");
}

BaseModel::BaseModel(std::variant<MlpModel, ForestModel> model, std::optional<ScalerStats> scaler)
    : model_(std::move(model)), scaler_(std::move(scaler)) {}

std::vector<double> BaseModel::predict(const Matrix& x) const {
  const Matrix* input = &x;
  Matrix scaled;
  if (scaler_) {
    scaled = transform(*scaler_, x);
    input = &scaled;
  }
  if (const auto* mlp = std::get_if<MlpModel>(&model_)) return models::predict(*mlp, *input);
  return predict_proba(std::get<ForestModel>(model_), *input);
}

std::size_t BaseModel::input_dim() const {
  if (const auto* mlp = std::get_if<MlpModel>(&model_)) return mlp->input_dim();
  return std::get<ForestModel>(model_).input_dim;
}

BaseModelKind BaseModel::kind() const {
  return std::holds_alternative<MlpModel>(model_) ? BaseModelKind::kMlp : BaseModelKind::kForest;
}

BaseModel train_base_model(const Matrix& x, std::span<const double> y, const BaseModelConfig& config) {
  std::optional<ScalerStats> scaler;
  const Matrix* input = &x;
  Matrix scaled;
  if (config.standardize) {
    scaler = fit_scaler(x);
    scaled = transform(*scaler, x);
    input = &scaled;
  }
  if (config.kind == BaseModelKind::kMlp) return BaseModel(train_mlp(*input, y, config.mlp), scaler);
  return BaseModel(train_forest(*input, y, config.forest), scaler);
}

void save_base_model(const std::filesystem::path& path, const BaseModel& model) {
  CheckpointFile file;
  file.header["format_version"] = kBaseModelFormatVersion;
  file.header["kind"] = to_string(model.kind());
  file.header["standardize"] = model.scaler().has_value();
  if (model.scaler()) {
    file.payload.insert(file.payload.end(), model.scaler()->mean.begin(), model.scaler()->mean.end());
    file.payload.insert(file.payload.end(), model.scaler()->std.begin(), model.scaler()->std.end());
  }
  if (const auto* mlp = std::get_if<MlpModel>(&model.model())) {
    write_mlp(*mlp, file.header, file.payload);
  } else {
    write_forest(std::get<ForestModel>(model.model()), file.header, file.payload);
  }
  file.header["input_dim"] = model.input_dim();
  write_checkpoint(path, kMagic, file);
}

BaseModel load_base_model(const std::filesystem::path& path) {
  CheckpointFile file = read_checkpoint(path, kMagic);
  try {
    int version = file.header.at("format_version").get<int>();
    if (version != kBaseModelFormatVersion) {
      throw FormatError("base model checkpoint " + path.string() + " has format_version " + std::to_string(version) +
                        ", expected " + std::to_string(kBaseModelFormatVersion));
    }
    PayloadReader in{file.payload};
    std::optional<ScalerStats> scaler;
    std::size_t dim = file.header.at("input_dim").get<std::size_t>();
    if (file.header.at("standardize").get<bool>()) scaler = ScalerStats{in.take(dim), in.take(dim)};
    BaseModelKind kind = parse_base_model_kind(file.header.at("kind").get<std::string>());
    std::variant<MlpModel, ForestModel> inner;
    if (kind == BaseModelKind::kMlp) {
      inner = read_mlp(file.header, in);
    } else {
      inner = read_forest(file.header, in);
    }
    if (in.pos != file.payload.size()) throw FormatError("base model checkpoint has trailing payload");
    return BaseModel(std::move(inner), std::move(scaler));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("base model checkpoint " + path.string() + " has a malformed header: " + e.what());
  }
}

}  // namespace xpfn::models
