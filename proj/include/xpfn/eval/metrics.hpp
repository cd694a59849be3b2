// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xpfn/common/error.hpp"
#include "xpfn/common/matrix.hpp"

namespace xpfn::eval {

class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

// Product-moment correlation; throws UndefinedCorrelation if either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);
// Over the flattened n*m entries.
double pearson(const Matrix& a, const Matrix& b);

// max(1, floor(m / 3)).
std::size_t default_topk(std::size_t m);

// Indices of the k largest |v|, ties to the lower index, ascending.
std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k);

double jaccard_topk(std::span<const double> a, std::span<const double> b, std::size_t k);
// Mean over rows; k = 0 picks default_topk(m).
double mean_jaccard_topk(const Matrix& a, const Matrix& b, std::size_t k = 0);

// Median wall-clock seconds over `repetitions` (>= 3) calls.
double measure_runtime(const std::function<void()>& op, std::size_t repetitions);

// Seconds scaled to a workload of 1000 feature contributions.
double per_thousand_contributions(double seconds, std::size_t contributions);

struct MetricReport {
  std::string dataset;
  std::string method;
  std::size_t k_shots = 0;
  std::string base_kind;
  std::uint64_t seed = 0;
  std::optional<double> pearson;  // empty when undefined
  double jaccard_topk = 0.0;
  double runtime_seconds = 0.0;
};

// Wall-clock time is the one non-reproducible field; omit it for outputs that
// must be byte-identical across runs.
nlohmann::json report_to_json(const MetricReport& r, bool with_runtime = true);
MetricReport report_from_json(const nlohmann::json& j);

// dataset,method,k_shots,base_kind,seed,pearson,jaccard_topk[,runtime_seconds]
std::string report_csv_header(bool with_runtime = true);
std::string report_csv_row(const MetricReport& r, bool with_runtime = true);

}  // namespace xpfn::eval
