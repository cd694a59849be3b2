// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace xpfn::ad {

GradCheckResult finite_difference_check(const GraphBuilder& build, const TensorMap& inputs, double step,
                                        const std::vector<std::string>& wrt) {
  if (!(step > 0.0)) throw InvalidArgument("finite_difference_check: step must be positive");
  Graph graph;
  const NodeId loss = build(graph);
  TensorMap bound = inputs;
  graph.forward(bound, loss);
  const TensorMap analytic = graph.backward(loss);

  std::vector<std::string> names = wrt;
  if (names.empty()) {
    for (const auto& [name, _] : inputs) names.push_back(name);
  }

  GradCheckResult result;
  for (const auto& name : names) {
    auto it = bound.find(name);
    if (it == bound.end()) throw InvalidArgument("finite_difference_check: unknown input '" + name + "'");
    const Tensor& grad = analytic.at(name);
    Tensor& value = it->second;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + step;
      const double up = graph.forward(bound, loss).item();
      value[i] = saved - step;
      const double down = graph.forward(bound, loss).item();
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
      const double rel = std::abs(grad[i] - numeric) / denom;
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_input = name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace xpfn::ad
