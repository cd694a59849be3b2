// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/eval/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace xpfn::eval {

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("pearson: sizes differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw UndefinedCorrelation("pearson needs at least two entries");
  if (all_equal(a) || all_equal(b)) throw UndefinedCorrelation("pearson is undefined for a constant input");
  double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("pearson is undefined for a constant input");
  double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double pearson(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("pearson: matrix shapes differ");
  return pearson(a.values(), b.values());
}

std::size_t default_topk(std::size_t m) { return std::max<std::size_t>(1, m / 3); }

std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k) {
  if (k == 0) throw InvalidArgument("top-k needs k >= 1");
  if (k > v.size()) {
    throw InvalidArgument("top-k with k = " + std::to_string(k) + " exceeds " + std::to_string(v.size()) + " features");
  }
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return std::abs(v[x]) > std::abs(v[y]); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double jaccard_topk(std::span<const double> a, std::span<const double> b, std::size_t k) {
  if (a.size() != b.size()) throw InvalidArgument("jaccard: rows have different lengths");
  std::vector<std::size_t> ta = topk_indices(a, k), tb = topk_indices(b, k);
  std::vector<std::size_t> both;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(both));
  double inter = static_cast<double>(both.size());
  return inter / (2.0 * static_cast<double>(k) - inter);
}

double mean_jaccard_topk(const Matrix& a, const Matrix& b, std::size_t k) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("jaccard: matrix shapes differ");
  if (a.rows() == 0) throw InvalidArgument("jaccard: no rows");
  if (k == 0) k = default_topk(a.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) total += jaccard_topk(a.row(i), b.row(i), k);
  return total / static_cast<double>(a.rows());
}

double measure_runtime(const std::function<void()>& op, std::size_t repetitions) {
  if (repetitions < 3) throw InvalidArgument("measure_runtime needs at least 3 repetitions");
  std::vector<double> times;
  for (std::size_t r = 0; r < repetitions; ++r) {
    auto start = std::chrono::steady_clock::now();
    op();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  std::size_t n = times.size();
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

double per_thousand_contributions(double seconds, std::size_t contributions) {
  if (contributions == 0) throw InvalidArgument("workload has no feature contributions");
  return seconds * 1000.0 / static_cast<double>(contributions);
}

nlohmann::json report_to_json(const MetricReport& r, bool with_runtime) {
  nlohmann::json j = {{"dataset", r.dataset},
                      {"method", r.method},
                      {"k_shots", r.k_shots},
                      {"base_kind", r.base_kind},
                      {"seed", r.seed},
                      {"pearson", r.pearson ? nlohmann::json(*r.pearson) : nlohmann::json(nullptr)},
                      {"jaccard_topk", r.jaccard_topk}};
  if (with_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.k_shots = j.at("k_shots").get<std::size_t>();
  r.base_kind = j.at("base_kind").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("pearson").is_null()) r.pearson = j.at("pearson").get<double>();
  r.jaccard_topk = j.at("jaccard_topk").get<double>();
  r.runtime_seconds = j.value("runtime_seconds", 0.0);
  return r;
}

std::string report_csv_header(bool with_runtime) {
  std::string h = "dataset,method,k_shots,base_kind,seed,pearson,jaccard_topk";
  return with_runtime ? h + ",runtime_seconds" : h;
}

std::string report_csv_row(const MetricReport& r, bool with_runtime) {
  std::string p = r.pearson ? fmt::format("{}", *r.pearson) : "nan";
  std::string row = fmt::format("{},{},{},{},{},{},{}", r.dataset, r.method, r.k_shots, r.base_kind, r.seed, p,
                                r.jaccard_topk);
  return with_runtime ? row + fmt::format(",{:.6g}", r.runtime_seconds) : row;
}

}  // namespace xpfn::eval
