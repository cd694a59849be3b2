// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "xpfn/common/matrix.hpp"

namespace xpfn::models {

// Per-feature z-score statistics. Zero-variance features get std := 1.
struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> std;
};

ScalerStats fit_scaler(const Matrix& x);
Matrix transform(const ScalerStats& stats, const Matrix& x);
Matrix inverse_transform(const ScalerStats& stats, const Matrix& x);

}  // namespace xpfn::models
