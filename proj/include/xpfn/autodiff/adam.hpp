// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "xpfn/autodiff/tensor.hpp"

namespace xpfn::ad {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  TensorMap first_moment;
  TensorMap second_moment;
  std::int64_t step = 0;
};

// One bias-corrected Adam update of every tensor in `params`. Parameters
// without an entry in `grads` are treated as having zero gradient.
void adam_step(TensorMap& params, const TensorMap& grads, AdamState& state, double lr,
               const AdamConfig& config = {});

}  // namespace xpfn::ad
