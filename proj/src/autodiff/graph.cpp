// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace xpfn::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap as_matrix(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

enum class Broadcast { kSame, kScalar, kRow, kColumn };

// How `small` expands to the shape of `big`; nullopt-like failure via bool.
bool classify(const Tensor& big, const Tensor& small, Broadcast& mode) {
  if (small.shape() == big.shape()) {
    mode = Broadcast::kSame;
  } else if (small.size() == 1) {
    mode = Broadcast::kScalar;
  } else if (small.rows() == 1 && small.cols() == big.cols()) {
    mode = Broadcast::kRow;
  } else if (small.cols() == 1 && small.rows() == big.rows() && big.rank() >= 2) {
    mode = Broadcast::kColumn;
  } else {
    return false;
  }
  return true;
}

inline double broadcast_at(const Tensor& small, Broadcast mode, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Broadcast::kSame: return small[i];
    case Broadcast::kScalar: return small[0];
    case Broadcast::kRow: return small[i % cols];
    case Broadcast::kColumn: return small[i / cols];
  }
  return 0.0;
}

inline std::size_t broadcast_index(Broadcast mode, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Broadcast::kSame: return i;
    case Broadcast::kScalar: return 0;
    case Broadcast::kRow: return i % cols;
    case Broadcast::kColumn: return i / cols;
  }
  return 0;
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMultiply: return "multiply";
    case OpKind::kRelu: return "relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLayerNorm: return "layer_norm";
    case OpKind::kEmbedding: return "embedding";
    case OpKind::kReduceMean: return "reduce_mean";
    case OpKind::kLog: return "log";
  }
  return "?";
}

Graph::Node Graph::make_node(OpKind kind, std::vector<std::size_t> inputs, std::string name) {
  Node n;
  n.kind = kind;
  n.inputs = std::move(inputs);
  n.name = std::move(name);
  return n;
}

NodeId Graph::push(Node node) {
  for (auto in : node.inputs) {
    if (in >= nodes_.size()) throw InvalidArgument("Graph: node references unknown input #" + std::to_string(in));
  }
  nodes_.push_back(std::move(node));
  values_.emplace_back();
  evaluated_ = false;
  return NodeId{nodes_.size() - 1};
}

void Graph::check(NodeId id) const {
  if (id.index >= nodes_.size()) throw InvalidArgument("Graph: unknown node #" + std::to_string(id.index));
}

NodeId Graph::input(const std::string& name) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::kInput && nodes_[i].name == name) return NodeId{i};
  }
  Node n = make_node(OpKind::kInput, {}, name);
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value, std::string label) {
  Node n = make_node(OpKind::kConstant, {}, std::move(label));
  n.constant = std::move(value);
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b, bool transpose_b) {
  Node n = make_node(OpKind::kMatMul, {a.index, b.index});
  n.flag = transpose_b;
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) { return push(make_node(OpKind::kAdd, {a.index, b.index})); }
NodeId Graph::multiply(NodeId a, NodeId b) { return push(make_node(OpKind::kMultiply, {a.index, b.index})); }
NodeId Graph::relu(NodeId a) { return push(make_node(OpKind::kRelu, {a.index})); }
NodeId Graph::tanh(NodeId a) { return push(make_node(OpKind::kTanh, {a.index})); }
NodeId Graph::softmax(NodeId a) { return push(make_node(OpKind::kSoftmax, {a.index})); }

NodeId Graph::layer_norm(NodeId a, double eps) {
  Node n = make_node(OpKind::kLayerNorm, {a.index});
  n.attr = eps;
  return push(std::move(n));
}

NodeId Graph::embedding(NodeId table, std::vector<std::size_t> indices) {
  Node n = make_node(OpKind::kEmbedding, {table.index});
  n.indices = std::move(indices);
  return push(std::move(n));
}

NodeId Graph::reduce_mean(NodeId a, ReduceAxis axis) {
  Node n = make_node(OpKind::kReduceMean, {a.index});
  n.axis = axis;
  return push(std::move(n));
}

NodeId Graph::log(NodeId a, double floor) {
  Node n = make_node(OpKind::kLog, {a.index});
  n.attr = floor;
  return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double factor) { return multiply(a, constant(Tensor::scalar(factor))); }
NodeId Graph::add_scalar(NodeId a, double offset) { return add(a, constant(Tensor::scalar(offset))); }
NodeId Graph::subtract(NodeId a, NodeId b) { return add(a, scale(b, -1.0)); }

NodeId Graph::sigmoid(NodeId a) {
  // sigmoid(x) = (1 + tanh(x / 2)) / 2
  return add_scalar(scale(tanh(scale(a, 0.5)), 0.5), 0.5);
}

NodeId Graph::linear(NodeId x, NodeId weight, NodeId bias) { return add(matmul(x, weight), bias); }

const Tensor& Graph::value(NodeId id) const {
  check(id);
  return values_[id.index];
}

std::string Graph::describe(NodeId id) const {
  check(id);
  const auto& n = nodes_[id.index];
  std::string s = "#" + std::to_string(id.index) + " " + op_name(n.kind);
  if (!n.name.empty()) s += " '" + n.name + "'";
  return s;
}

void Graph::fail(std::size_t index, const std::string& message) const {
  throw ShapeError("node " + describe(NodeId{index}) + ": " + message);
}

const Tensor& Graph::forward(const TensorMap& inputs, NodeId output) {
  check(output);
  for (std::size_t i = 0; i <= output.index; ++i) {
    auto& node = nodes_[i];
    if (node.kind == OpKind::kInput) {
      auto it = inputs.find(node.name);
      if (it == inputs.end()) throw InvalidArgument("node " + describe(NodeId{i}) + ": input not bound");
      values_[i] = it->second;
    } else {
      evaluate(i);
    }
    if (check_finite_ && !values_[i].all_finite()) {
      throw NonFiniteError("node " + describe(NodeId{i}) + ": non-finite value");
    }
  }
  evaluated_ = true;
  evaluated_upto_ = output.index;
  return values_[output.index];
}

void Graph::evaluate(std::size_t index) {
  const Node& node = nodes_[index];
  Tensor& out = values_[index];
  auto in = [&](std::size_t k) -> const Tensor& { return values_[node.inputs[k]]; };

  switch (node.kind) {
    case OpKind::kInput:
      break;
    case OpKind::kConstant:
      out = node.constant;
      break;
    case OpKind::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.rank() > 2 || b.rank() > 2) fail(index, "matmul expects rank <= 2 operands");
      const std::size_t inner_b = node.flag ? b.cols() : b.rows();
      const std::size_t out_cols = node.flag ? b.rows() : b.cols();
      if (a.cols() != inner_b) {
        fail(index, "inner dimensions differ: " + shape_string(a.shape()) + " x " + shape_string(b.shape()) +
                        (node.flag ? "^T" : ""));
      }
      out = Tensor(Shape{a.rows(), out_cols});
      if (node.flag) {
        as_matrix(out).noalias() = as_matrix(a) * as_matrix(b).transpose();
      } else {
        as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
      }
      break;
    }
    case OpKind::kAdd:
    case OpKind::kMultiply: {
      const bool swap = in(0).size() < in(1).size();
      const Tensor& big = swap ? in(1) : in(0);
      const Tensor& small = swap ? in(0) : in(1);
      Broadcast mode;
      if (!classify(big, small, mode)) {
        fail(index, "cannot broadcast " + shape_string(small.shape()) + " to " + shape_string(big.shape()));
      }
      out = Tensor(big.shape());
      const std::size_t cols = big.cols();
      if (node.kind == OpKind::kAdd) {
        for (std::size_t i = 0; i < big.size(); ++i) out[i] = big[i] + broadcast_at(small, mode, i, cols);
      } else {
        for (std::size_t i = 0; i < big.size(); ++i) out[i] = big[i] * broadcast_at(small, mode, i, cols);
      }
      break;
    }
    case OpKind::kRelu: {
      out = in(0);
      for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
      break;
    }
    case OpKind::kTanh: {
      out = in(0);
      for (auto& v : out.values()) v = std::tanh(v);
      break;
    }
    case OpKind::kSoftmax: {
      out = in(0);
      const std::size_t rows = out.rows(), cols = out.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        double* row = out.data() + r * cols;
        const double mx = *std::max_element(row, row + cols);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          row[c] = std::exp(row[c] - mx);
          sum += row[c];
        }
        for (std::size_t c = 0; c < cols; ++c) row[c] /= sum;
      }
      break;
    }
    case OpKind::kLayerNorm: {
      out = in(0);
      const std::size_t rows = out.rows(), cols = out.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        double* row = out.data() + r * cols;
        double mu = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mu += row[c];
        mu /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t c = 0; c < cols; ++c) var += (row[c] - mu) * (row[c] - mu);
        var /= static_cast<double>(cols);
        const double inv = 1.0 / std::sqrt(var + node.attr);
        for (std::size_t c = 0; c < cols; ++c) row[c] = (row[c] - mu) * inv;
      }
      break;
    }
    case OpKind::kEmbedding: {
      const Tensor& table = in(0);
      if (table.rank() != 2) fail(index, "embedding table must be rank 2, got " + shape_string(table.shape()));
      const std::size_t d = table.cols();
      out = Tensor(Shape{node.indices.size(), d});
      for (std::size_t i = 0; i < node.indices.size(); ++i) {
        const auto idx = node.indices[i];
        if (idx >= table.rows()) {
          fail(index, "index " + std::to_string(idx) + " out of range for table " + shape_string(table.shape()));
        }
        std::copy_n(table.data() + idx * d, d, out.data() + i * d);
      }
      break;
    }
    case OpKind::kReduceMean: {
      const Tensor& a = in(0);
      if (node.axis == ReduceAxis::kAll) {
        double sum = 0.0;
        for (double v : a.values()) sum += v;
        out = Tensor::scalar(a.size() == 0 ? 0.0 : sum / static_cast<double>(a.size()));
      } else {
        const std::size_t rows = a.rows(), cols = a.cols();
        out = Tensor(Shape{1, cols});
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) out[c] += a[r * cols + c];
        for (auto& v : out.values()) v /= static_cast<double>(rows);
      }
      break;
    }
    case OpKind::kLog: {
      out = in(0);
      for (auto& v : out.values()) v = std::log(std::max(v, node.attr));
      break;
    }
  }
}

TensorMap Graph::backward(NodeId loss) {
  check(loss);
  if (!evaluated_ || loss.index > evaluated_upto_) throw InvalidArgument("backward: run forward first");
  if (values_[loss.index].size() != 1) {
    throw InvalidArgument("backward: loss " + describe(loss) + " is not scalar, shape " +
                          shape_string(values_[loss.index].shape()));
  }
  std::vector<Tensor> grads(loss.index + 1);
  std::vector<bool> has_grad(loss.index + 1, false);
  grads[loss.index] = Tensor(values_[loss.index].shape(), 1.0);
  has_grad[loss.index] = true;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (has_grad[i]) propagate(i, grads, has_grad);
  }
  TensorMap out;
  for (std::size_t i = 0; i <= loss.index; ++i) {
    if (nodes_[i].kind != OpKind::kInput) continue;
    out[nodes_[i].name] = has_grad[i] ? std::move(grads[i]) : Tensor(values_[i].shape(), 0.0);
  }
  return out;
}

void Graph::propagate(std::size_t index, std::vector<Tensor>& grads, std::vector<bool>& has_grad) const {
  const Node& node = nodes_[index];
  const Tensor& dy = grads[index];
  const Tensor& y = values_[index];

  // Lazily allocates the gradient buffer of input k.
  auto grad_of = [&](std::size_t k) -> Tensor& {
    const std::size_t src = node.inputs[k];
    if (!has_grad[src]) {
      grads[src] = Tensor(values_[src].shape(), 0.0);
      has_grad[src] = true;
    }
    return grads[src];
  };
  auto in = [&](std::size_t k) -> const Tensor& { return values_[node.inputs[k]]; };
  auto is_constant = [&](std::size_t k) { return nodes_[node.inputs[k]].kind == OpKind::kConstant; };

  switch (node.kind) {
    case OpKind::kInput:
    case OpKind::kConstant:
      break;
    case OpKind::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (!is_constant(0)) {
        auto ga = as_matrix(grad_of(0));
        if (node.flag) {
          ga.noalias() += as_matrix(dy) * as_matrix(b);
        } else {
          ga.noalias() += as_matrix(dy) * as_matrix(b).transpose();
        }
      }
      if (!is_constant(1)) {
        auto gb = as_matrix(grad_of(1));
        if (node.flag) {
          gb.noalias() += as_matrix(dy).transpose() * as_matrix(a);
        } else {
          gb.noalias() += as_matrix(a).transpose() * as_matrix(dy);
        }
      }
      break;
    }
    case OpKind::kAdd:
    case OpKind::kMultiply: {
      const bool swap = in(0).size() < in(1).size();
      const std::size_t big_k = swap ? 1 : 0;
      const std::size_t small_k = swap ? 0 : 1;
      const Tensor& big = in(big_k);
      const Tensor& small = in(small_k);
      Broadcast mode;
      classify(big, small, mode);
      const std::size_t cols = big.cols();
      const bool mul = node.kind == OpKind::kMultiply;
      if (!is_constant(big_k)) {
        Tensor& g = grad_of(big_k);
        for (std::size_t i = 0; i < dy.size(); ++i) g[i] += mul ? dy[i] * broadcast_at(small, mode, i, cols) : dy[i];
      }
      if (!is_constant(small_k)) {
        Tensor& g = grad_of(small_k);
        for (std::size_t i = 0; i < dy.size(); ++i) g[broadcast_index(mode, i, cols)] += mul ? dy[i] * big[i] : dy[i];
      }
      break;
    }
    case OpKind::kRelu: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < dy.size(); ++i) g[i] += x[i] > 0.0 ? dy[i] : 0.0;
      break;
    }
    case OpKind::kTanh: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      for (std::size_t i = 0; i < dy.size(); ++i) g[i] += dy[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case OpKind::kSoftmax: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      const std::size_t rows = y.rows(), cols = y.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* yr = y.data() + r * cols;
        const double* dr = dy.data() + r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += dr[c] * yr[c];
        double* gr = g.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gr[c] += yr[c] * (dr[c] - dot);
      }
      break;
    }
    case OpKind::kLayerNorm: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      const Tensor& x = in(0);
      const std::size_t rows = y.rows(), cols = y.cols();
      const double n = static_cast<double>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x.data() + r * cols;
        const double* yr = y.data() + r * cols;
        const double* dr = dy.data() + r * cols;
        double mu = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mu += xr[c];
        mu /= n;
        double var = 0.0;
        for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mu) * (xr[c] - mu);
        var /= n;
        const double inv = 1.0 / std::sqrt(var + node.attr);
        double mean_d = 0.0, mean_dy = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          mean_d += dr[c];
          mean_dy += dr[c] * yr[c];
        }
        mean_d /= n;
        mean_dy /= n;
        double* gr = g.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gr[c] += inv * (dr[c] - mean_d - yr[c] * mean_dy);
      }
      break;
    }
    case OpKind::kEmbedding: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      const std::size_t d = g.cols();
      for (std::size_t i = 0; i < node.indices.size(); ++i) {
        double* dst = g.data() + node.indices[i] * d;
        const double* src = dy.data() + i * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
      }
      break;
    }
    case OpKind::kReduceMean: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      if (node.axis == ReduceAxis::kAll) {
        const double share = dy[0] / static_cast<double>(g.size());
        for (auto& v : g.values()) v += share;
      } else {
        const std::size_t rows = g.rows(), cols = g.cols();
        const double inv = 1.0 / static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += dy[c] * inv;
      }
      break;
    }
    case OpKind::kLog: {
      if (is_constant(0)) break;
      Tensor& g = grad_of(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < dy.size(); ++i) g[i] += x[i] > node.attr ? dy[i] / x[i] : 0.0;
      break;
    }
  }
}

}  // namespace xpfn::ad
