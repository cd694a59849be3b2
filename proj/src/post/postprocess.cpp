// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/post/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "xpfn/common/error.hpp"

namespace xpfn::post {

namespace {

void check_shapes(const Matrix& phi, std::span<const double> y_hat) {
  if (phi.empty()) throw InvalidArgument("attribution matrix is empty");
  if (phi.rows() != y_hat.size()) {
    throw InvalidArgument("attributions have " + std::to_string(phi.rows()) + " rows but there are " +
                          std::to_string(y_hat.size()) + " predictions");
  }
}

}  // namespace

Matrix recenter(const Matrix& phi) {
  if (phi.empty()) throw InvalidArgument("attribution matrix is empty");
  Matrix out = phi;
  if (all_equal(phi.values())) {
    std::fill(out.values().begin(), out.values().end(), 0.0);
    return out;
  }
  double mu = mean(phi.values());
  for (double& v : out.values()) v -= mu;
  return out;
}

Matrix rescale(const Matrix& phi, std::span<const double> y_hat) {
  check_shapes(phi, y_hat);
  double sy = all_equal(y_hat) ? 0.0 : population_std(y_hat);
  if (sy == 0.0) {
    spdlog::warn("rescale: predictions are constant, attributions set to zero");
    return Matrix(phi.rows(), phi.cols());
  }
  double sp = all_equal(phi.values()) ? 0.0 : population_std(phi.values());
  if (sp == 0.0) {
    spdlog::warn("rescale: attributions have zero spread, rescaling skipped");
    return phi;
  }
  double factor = sy / std::sqrt(static_cast<double>(phi.cols())) / sp;
  Matrix out = phi;
  for (double& v : out.values()) v *= factor;
  return out;
}

Matrix efficiency_correct(const Matrix& phi, std::span<const double> y_hat, double base_value) {
  if (phi.cols() == 0) throw InvalidArgument("efficiency correction needs at least one feature");
  check_shapes(phi, y_hat);
  Matrix out = phi;
  double m = static_cast<double>(phi.cols());
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    double total = 0.0;
    for (double v : phi.row(i)) total += v;
    double eps = (y_hat[i] - base_value - total) / m;
    for (double& v : out.row(i)) v += eps;
  }
  return out;
}

Matrix full_pipeline(const Matrix& phi, std::span<const double> y_hat, const CorrectionConfig& config) {
  check_shapes(phi, y_hat);
  Matrix out = phi;
  if (config.enable_recenter) out = recenter(out);
  if (config.enable_rescale) out = rescale(out, y_hat);
  if (config.enable_efficiency) out = efficiency_correct(out, y_hat, config.base_value.value_or(mean(y_hat)));
  return out;
}

}  // namespace xpfn::post
