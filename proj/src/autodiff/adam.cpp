// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/autodiff/adam.hpp"

#include <cmath>

#include "xpfn/common/error.hpp"

namespace xpfn::ad {

void adam_step(TensorMap& params, const TensorMap& grads, AdamState& state, double lr, const AdamConfig& config) {
  if (!(lr > 0.0)) throw InvalidArgument("adam_step: learning rate must be positive, got " + std::to_string(lr));
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [name, param] : params) {
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.shape() != param.shape()) m = Tensor(param.shape(), 0.0);
    if (v.shape() != param.shape()) v = Tensor(param.shape(), 0.0);
    const auto it = grads.find(name);
    const Tensor* grad = it == grads.end() ? nullptr : &it->second;
    if (grad && grad->shape() != param.shape()) {
      throw InvalidArgument("adam_step: gradient for '" + name + "' has shape " + shape_string(grad->shape()) +
                            ", parameter has " + shape_string(param.shape()));
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = grad ? (*grad)[i] : 0.0;
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      param[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace xpfn::ad
