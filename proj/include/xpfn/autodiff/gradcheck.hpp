// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "xpfn/autodiff/graph.hpp"

namespace xpfn::ad {

// Builds a graph whose inputs are bound by name and returns the scalar loss.
using GraphBuilder = std::function<NodeId(Graph&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_input;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Compares backward() against central differences for every element of the
// inputs listed in `wrt` (all inputs when empty). The relative error of one
// element is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckResult finite_difference_check(const GraphBuilder& build, const TensorMap& inputs, double step,
                                        const std::vector<std::string>& wrt = {});

}  // namespace xpfn::ad
