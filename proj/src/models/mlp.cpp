// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/models/mlp.hpp"

#include <cmath>
#include <string>

#include "xpfn/autodiff/adam.hpp"
#include "xpfn/autodiff/graph.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::models {

namespace {

constexpr double kLogFloor = 1e-12;

std::string weight_name(std::size_t l) { return "w" + std::to_string(l); }
std::string bias_name(std::size_t l) { return "b" + std::to_string(l); }

ad::TensorMap to_params(const MlpModel& model) {
  ad::TensorMap params;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const Matrix& w = model.weights[l];
    params[weight_name(l)] = ad::Tensor::matrix(w.rows(), w.cols(), w.storage());
    params[bias_name(l)] = ad::Tensor(ad::Shape{model.biases[l].size()}, model.biases[l]);
  }
  return params;
}

void from_params(const ad::TensorMap& params, MlpModel& model) {
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const ad::Tensor& w = params.at(weight_name(l));
    model.weights[l].storage().assign(w.values().begin(), w.values().end());
    const ad::Tensor& b = params.at(bias_name(l));
    model.biases[l].assign(b.values().begin(), b.values().end());
  }
}

ad::NodeId build_network(ad::Graph& g, const MlpModel& model) {
  ad::NodeId h = g.input("x");
  std::size_t layers = model.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    h = g.linear(h, g.input(weight_name(l)), g.input(bias_name(l)));
    if (l + 1 < layers) h = g.relu(h);
  }
  return h;
}

double learning_rate(const MlpConfig& config, std::size_t epoch) {
  if (config.schedule == LrSchedule::kInverseSqrt) return config.learning_rate / std::sqrt(epoch + 1.0);
  return config.learning_rate;
}

ad::Tensor to_tensor(const Matrix& m) { return ad::Tensor::matrix(m.rows(), m.cols(), m.storage()); }

MlpModel fit(const Matrix& x, const Matrix& y, MlpOutput output, const MlpConfig& config) {
  std::vector<std::size_t> sizes{x.cols()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(y.cols());
  MlpModel model = init_mlp(sizes, output, config.seed);

  ad::Graph g;
  ad::NodeId out = build_network(g, model);
  ad::NodeId target = g.input("y");
  ad::NodeId loss;
  if (output == MlpOutput::kSigmoid) {
    // -mean(y log p + (1 - y) log(1 - p))
    ad::NodeId p = g.sigmoid(out);
    ad::NodeId one_minus_p = g.add_scalar(g.scale(p, -1.0), 1.0);
    ad::NodeId one_minus_y = g.add_scalar(g.scale(target, -1.0), 1.0);
    ad::NodeId ll = g.add(g.multiply(target, g.log(p, kLogFloor)), g.multiply(one_minus_y, g.log(one_minus_p, kLogFloor)));
    loss = g.scale(g.reduce_mean(ll), -1.0);
  } else {
    ad::NodeId diff = g.subtract(out, target);
    loss = g.reduce_mean(g.multiply(diff, diff));
  }

  ad::TensorMap params = to_params(model);
  ad::TensorMap feed = params;
  feed["x"] = to_tensor(x);
  feed["y"] = to_tensor(y);
  ad::AdamState state;
  model.loss_history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& [name, value] : params) feed[name] = value;
    double value = 0.0;
    try {
      value = g.forward(feed, loss).item();
    } catch (const ad::NonFiniteError& e) {
      std::string last = model.loss_history.empty() ? "none" : std::to_string(model.loss_history.size() - 1);
      throw TrainingDiverged("MLP training diverged at epoch " + std::to_string(epoch) +
                             " (last finite epoch: " + last + "): " + e.what());
    }
    model.loss_history.push_back(value);
    ad::TensorMap grads = g.backward(loss);
    grads.erase("x");
    grads.erase("y");
    ad::adam_step(params, grads, state, learning_rate(config, epoch));
  }
  from_params(params, model);
  return model;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) count += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return count;
}

MlpModel init_mlp(std::vector<std::size_t> layer_sizes, MlpOutput output, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw InvalidArgument("an MLP needs input and output sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw InvalidArgument("MLP layer sizes must be positive");
  MlpModel model;
  model.layer_sizes = std::move(layer_sizes);
  model.output = output;
  Rng rng = make_rng(seed);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    std::size_t in = model.layer_sizes[l];
    std::size_t out = model.layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(in, out);
    for (double& v : w.values()) v = uniform(rng, -limit, limit);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(out, 0.0);
  }
  return model;
}

MlpModel train_mlp(const Matrix& x, std::span<const double> y, const MlpConfig& config) {
  if (y.size() != x.rows()) throw InvalidArgument("train_mlp: label count does not match row count");
  if (x.rows() < 16) throw InvalidArgument("train_mlp needs at least 16 rows");
  bool has0 = false;
  bool has1 = false;
  for (double v : y) {
    if (v == 0.0) {
      has0 = true;
    } else if (v == 1.0) {
      has1 = true;
    } else {
      throw InvalidArgument("train_mlp: labels must be 0 or 1");
    }
  }
  if (!has0 || !has1) throw InvalidArgument("train_mlp: labels contain a single class");
  Matrix target(y.size(), 1, std::vector<double>(y.begin(), y.end()));
  return fit(x, target, MlpOutput::kSigmoid, config);
}

MlpModel train_mlp_regressor(const Matrix& x, const Matrix& y, const MlpConfig& config) {
  if (y.rows() != x.rows()) throw InvalidArgument("train_mlp_regressor: target rows do not match input rows");
  if (x.rows() == 0 || y.cols() == 0) throw InvalidArgument("train_mlp_regressor: empty data");
  return fit(x, y, MlpOutput::kIdentity, config);
}

Matrix predict_outputs(const MlpModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) {
    throw InvalidArgument("MLP expects " + std::to_string(model.input_dim()) + " features, got " +
                          std::to_string(x.cols()));
  }
  // Plain row-by-row evaluation: a row's result does not depend on what
  // else is in the batch.
  Matrix out(x.rows(), model.output_dim());
  std::vector<double> cur;
  std::vector<double> next;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    cur.assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      const Matrix& w = model.weights[l];
      next.assign(model.biases[l].begin(), model.biases[l].end());
      for (std::size_t i = 0; i < w.rows(); ++i) {
        double a = cur[i];
        if (a == 0.0) continue;
        std::span<const double> wr = w.row(i);
        for (std::size_t j = 0; j < w.cols(); ++j) next[j] += a * wr[j];
      }
      if (l + 1 < model.weights.size()) {
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      }
      cur.swap(next);
    }
    for (std::size_t j = 0; j < cur.size(); ++j) {
      out(r, j) = model.output == MlpOutput::kSigmoid ? 1.0 / (1.0 + std::exp(-cur[j])) : cur[j];
    }
  }
  return out;
}

std::vector<double> predict(const MlpModel& model, const Matrix& x) { return predict_outputs(model, x).column(0); }

}  // namespace xpfn::models
