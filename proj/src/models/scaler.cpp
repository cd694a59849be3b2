// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/models/scaler.hpp"

#include "xpfn/common/error.hpp"

namespace xpfn::models {

ScalerStats fit_scaler(const Matrix& x) {
  if (x.rows() < 2) throw InvalidArgument("fit_scaler needs at least 2 rows");
  ScalerStats stats;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> col = x.column(c);
    if (all_equal(col)) {
      stats.mean.push_back(col.front());
      stats.std.push_back(1.0);
    } else {
      stats.mean.push_back(mean(col));
      stats.std.push_back(population_std(col));
    }
  }
  return stats;
}

namespace {

void check_dims(const ScalerStats& stats, const Matrix& x) {
  if (stats.mean.size() != x.cols()) {
    throw InvalidArgument("scaler fitted on " + std::to_string(stats.mean.size()) + " features, got " +
                          std::to_string(x.cols()));
  }
}

}  // namespace

Matrix transform(const ScalerStats& stats, const Matrix& x) {
  check_dims(stats, x);
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - stats.mean[c]) / stats.std[c];
  return out;
}

Matrix inverse_transform(const ScalerStats& stats, const Matrix& x) {
  check_dims(stats, x);
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) * stats.std[c] + stats.mean[c];
  return out;
}

}  // namespace xpfn::models
