// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>

#include "xpfn/common/matrix.hpp"

namespace xpfn::post {

struct CorrectionConfig {
  bool enable_recenter = true;
  bool enable_rescale = true;
  bool enable_efficiency = true;
  std::optional<double> base_value;  // v; defaults to mean(y_hat)
};

// Subtracts the mean over all n*m entries.
Matrix recenter(const Matrix& phi);

// Scales every entry by (Std(y_hat) / sqrt(m)) / Std(phi), population std.
// Std(phi) = 0 skips the step; Std(y_hat) = 0 returns zeros. Both warn.
Matrix rescale(const Matrix& phi, std::span<const double> y_hat);

// Adds (y_i - v - sum_j phi_ij) / m to every entry of row i.
Matrix efficiency_correct(const Matrix& phi, std::span<const double> y_hat, double base_value);

// recenter -> rescale -> efficiency, each behind its flag.
Matrix full_pipeline(const Matrix& phi, std::span<const double> y_hat, const CorrectionConfig& config = {});

}  // namespace xpfn::post
