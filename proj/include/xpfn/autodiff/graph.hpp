// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "xpfn/autodiff/tensor.hpp"
#include "xpfn/common/error.hpp"

namespace xpfn::ad {

enum class OpKind {
  kInput,
  kConstant,
  kMatMul,
  kAdd,
  kMultiply,
  kRelu,
  kTanh,
  kSoftmax,
  kLayerNorm,
  kEmbedding,
  kReduceMean,
  kLog,
};

const char* op_name(OpKind kind);

enum class ReduceAxis { kAll, kRows };

struct NodeId {
  std::size_t index = 0;
};

class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Define-then-run reverse-mode graph. Nodes are appended in construction
// order, which is a topological order because every node can only reference
// earlier nodes. forward() may be called repeatedly with new bindings.
//
// Broadcasting for add/multiply: the second operand may equal the first in
// shape, be a single value, be a row vector matching the last axis, or be a
// column [rows, 1] matching the leading extent.
class Graph {
 public:
  NodeId input(const std::string& name);
  NodeId constant(Tensor value, std::string label = {});

  NodeId matmul(NodeId a, NodeId b, bool transpose_b = false);
  NodeId add(NodeId a, NodeId b);
  NodeId multiply(NodeId a, NodeId b);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId softmax(NodeId a);
  NodeId layer_norm(NodeId a, double eps = 1e-5);
  NodeId embedding(NodeId table, std::vector<std::size_t> indices);
  NodeId reduce_mean(NodeId a, ReduceAxis axis = ReduceAxis::kAll);
  // log(max(x, floor)); the gradient is zero where the floor is active.
  NodeId log(NodeId a, double floor = 0.0);

  // Composites built only from the primitives above.
  NodeId scale(NodeId a, double factor);
  NodeId add_scalar(NodeId a, double offset);
  NodeId subtract(NodeId a, NodeId b);
  NodeId sigmoid(NodeId a);
  NodeId linear(NodeId x, NodeId weight, NodeId bias);

  // Values of NaN/Inf raise NonFiniteError naming the node. On by default.
  void set_check_finite(bool enabled) { check_finite_ = enabled; }

  // Evaluates every node; all input names must be bound.
  const Tensor& forward(const TensorMap& inputs, NodeId output);
  // Gradients of a scalar node with respect to every bound input, by name.
  TensorMap backward(NodeId loss);

  const Tensor& value(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  std::string describe(NodeId id) const;

 private:
  struct Node {
    OpKind kind = OpKind::kInput;
    std::vector<std::size_t> inputs;
    std::string name;
    double attr = 0.0;
    bool flag = false;
    ReduceAxis axis = ReduceAxis::kAll;
    std::vector<std::size_t> indices;
    Tensor constant;
  };

  static Node make_node(OpKind kind, std::vector<std::size_t> inputs, std::string name = {});
  NodeId push(Node node);
  void check(NodeId id) const;
  void evaluate(std::size_t index);
  void propagate(std::size_t index, std::vector<Tensor>& grads, std::vector<bool>& has_grad) const;
  [[noreturn]] void fail(std::size_t index, const std::string& message) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> values_;
  bool check_finite_ = true;
  bool evaluated_ = false;
  std::size_t evaluated_upto_ = 0;
};

}  // namespace xpfn::ad
