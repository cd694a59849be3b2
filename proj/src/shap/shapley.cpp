// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/shap/shapley.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "xpfn/common/error.hpp"
#include "xpfn/common/parallel.hpp"

namespace xpfn::shap {

namespace {

using Coalition = std::vector<bool>;

void check_inputs(std::span<const double> x, const Matrix& background) {
  if (background.rows() == 0) throw InvalidArgument("Shapley background set is empty");
  if (background.cols() != x.size()) {
    throw InvalidArgument("background has " + std::to_string(background.cols()) + " features, instance has " +
                          std::to_string(x.size()));
  }
}

// Evaluates many coalitions with a single predict call. Each coalition
// occupies a block of background-size rows.
std::vector<double> evaluate_coalitions(const PredictFn& predict, std::span<const double> x, const Matrix& background,
                                        const std::vector<Coalition>& coalitions) {
  std::size_t nb = background.rows();
  std::size_t m = x.size();
  Matrix batch(coalitions.size() * nb, m);
  for (std::size_t c = 0; c < coalitions.size(); ++c) {
    for (std::size_t b = 0; b < nb; ++b) {
      std::span<double> row = batch.row(c * nb + b);
      std::span<const double> bg = background.row(b);
      for (std::size_t j = 0; j < m; ++j) row[j] = coalitions[c][j] ? x[j] : bg[j];
    }
  }
  std::vector<double> preds = predict(batch);
  if (preds.size() != batch.rows()) throw InvalidArgument("predictor returned the wrong number of outputs");
  std::vector<double> values(coalitions.size());
  for (std::size_t c = 0; c < coalitions.size(); ++c) {
    double sum = 0.0;
    for (std::size_t b = 0; b < nb; ++b) sum += preds[c * nb + b];
    values[c] = sum / static_cast<double>(nb);
  }
  return values;
}

std::vector<double> exact_from_values(const std::vector<double>& values, std::size_t m) {
  std::vector<double> weights(m);
  for (std::size_t s = 0; s < m; ++s) weights[s] = shapley_weight(s, m);
  std::vector<double> phi(m, 0.0);
  std::uint64_t full = (std::uint64_t{1} << m);
  for (std::size_t j = 0; j < m; ++j) {
    std::uint64_t bit = std::uint64_t{1} << j;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      std::size_t s = static_cast<std::size_t>(__builtin_popcountll(mask));
      phi[j] += weights[s] * (values[mask | bit] - values[mask]);
    }
  }
  return phi;
}

}  // namespace

const char* to_string(ShapMode mode) {
  switch (mode) {
    case ShapMode::kExact:
      return "exact";
    case ShapMode::kPermutation:
      return "permutation";
    case ShapMode::kHybrid:
      return "hybrid";
  }
  return "?";
}

ShapMode parse_shap_mode(const std::string& text) {
  if (text == "exact") return ShapMode::kExact;
  if (text == "permutation") return ShapMode::kPermutation;
  if (text == "hybrid") return ShapMode::kHybrid;
  throw InvalidArgument("unknown SHAP mode '" + text + "' (expected exact, permutation or hybrid)");
}

double shapley_weight(std::size_t subset_size, std::size_t m) {
  if (m == 0 || subset_size >= m) throw InvalidArgument("shapley_weight needs |S| < m");
  // s! (m-s-1)! / m! = 1 / (m * C(m-1, s))
  double binom = 1.0;
  std::size_t k = std::min(subset_size, m - 1 - subset_size);
  for (std::size_t i = 1; i <= k; ++i) binom = binom * static_cast<double>(m - 1 - k + i) / static_cast<double>(i);
  return 1.0 / (static_cast<double>(m) * binom);
}

double coalition_value(const PredictFn& predict, std::span<const double> x, std::span<const std::size_t> subset,
                       const Matrix& background) {
  check_inputs(x, background);
  Coalition c(x.size(), false);
  for (std::size_t j : subset) {
    if (j >= x.size()) throw InvalidArgument("coalition member " + std::to_string(j) + " out of range");
    c[j] = true;
  }
  return evaluate_coalitions(predict, x, background, {c})[0];
}

std::vector<double> all_coalition_values(const PredictFn& predict, std::span<const double> x,
                                         const Matrix& background) {
  check_inputs(x, background);
  std::size_t m = x.size();
  if (m >= 31) throw InvalidArgument("too many features to enumerate all coalitions");
  std::vector<Coalition> coalitions(std::size_t{1} << m, Coalition(m));
  for (std::size_t mask = 0; mask < coalitions.size(); ++mask)
    for (std::size_t j = 0; j < m; ++j) coalitions[mask][j] = (mask >> j) & 1U;
  return evaluate_coalitions(predict, x, background, coalitions);
}

std::vector<double> exact_shapley(const PredictFn& predict, std::span<const double> x, const Matrix& background,
                                  std::size_t exact_max_features) {
  if (x.size() > exact_max_features) {
    throw InvalidArgument("exact Shapley limited to " + std::to_string(exact_max_features) + " features, got " +
                          std::to_string(x.size()) + "; use permutation mode");
  }
  if (x.empty()) return {};
  return exact_from_values(all_coalition_values(predict, x, background), x.size());
}

std::vector<double> permutation_shapley(const PredictFn& predict, std::span<const double> x,
                                        const Matrix& background, std::size_t n_permutations, Rng& rng) {
  check_inputs(x, background);
  if (n_permutations == 0) throw InvalidArgument("n_permutations must be at least 1");
  std::size_t m = x.size();
  if (m == 0) return {};

  std::vector<std::vector<std::size_t>> orders;
  std::vector<std::size_t> base(m);
  std::iota(base.begin(), base.end(), std::size_t{0});
  while (orders.size() < n_permutations) {
    std::shuffle(base.begin(), base.end(), rng);
    orders.push_back(base);
    if (orders.size() < n_permutations) orders.emplace_back(base.rbegin(), base.rend());
  }

  // Memoize each distinct prefix coalition once, then predict in one batch.
  std::unordered_map<Coalition, std::size_t> index;
  std::vector<Coalition> coalitions;
  auto intern = [&](const Coalition& c) {
    auto [it, inserted] = index.try_emplace(c, coalitions.size());
    if (inserted) coalitions.push_back(c);
    return it->second;
  };
  std::vector<std::vector<std::size_t>> walk(orders.size());
  for (std::size_t p = 0; p < orders.size(); ++p) {
    Coalition c(m, false);
    walk[p].push_back(intern(c));
    for (std::size_t j : orders[p]) {
      c[j] = true;
      walk[p].push_back(intern(c));
    }
  }
  std::vector<double> values = evaluate_coalitions(predict, x, background, coalitions);

  std::vector<double> phi(m, 0.0);
  for (std::size_t p = 0; p < orders.size(); ++p) {
    for (std::size_t k = 0; k < m; ++k) phi[orders[p][k]] += values[walk[p][k + 1]] - values[walk[p][k]];
  }
  for (double& v : phi) v /= static_cast<double>(orders.size());
  return phi;
}

ShapResult hybrid_shapley(const PredictFn& predict, const Matrix& x, const ShapConfig& config) {
  if (config.background.rows() == 0) throw InvalidArgument("Shapley background set is empty");
  if (config.background.cols() != x.cols()) throw InvalidArgument("background and data feature counts differ");
  if (config.n_permutations == 0) throw InvalidArgument("n_permutations must be at least 1");
  std::size_t m = x.cols();
  bool exact = config.mode == ShapMode::kExact ||
               (config.mode == ShapMode::kHybrid && m <= config.exact_max_features);
  if (config.mode == ShapMode::kExact && m > config.exact_max_features) {
    throw InvalidArgument("exact Shapley limited to " + std::to_string(config.exact_max_features) +
                          " features, got " + std::to_string(m) + "; use permutation mode");
  }

  ShapResult result;
  result.estimator = exact ? "exact" : "permutation";
  result.phi = Matrix(x.rows(), m);
  result.residuals.assign(x.rows(), 0.0);
  std::vector<double> bg_pred = predict(config.background);
  double sum = 0.0;
  for (double v : bg_pred) sum += v;
  result.base_value = sum / static_cast<double>(bg_pred.size());
  std::vector<double> fx = predict(x);

  parallel_for(x.rows(), config.threads, [&](std::size_t i) {
    std::span<const double> row = x.row(i);
    std::vector<double> phi;
    if (exact) {
      phi = exact_shapley(predict, row, config.background, config.exact_max_features);
    } else {
      Rng rng = make_rng(derive_seed(config.seed, {i}));
      phi = permutation_shapley(predict, row, config.background, config.n_permutations, rng);
    }
    std::copy(phi.begin(), phi.end(), result.phi.row(i).begin());
    double total = 0.0;
    for (double v : phi) total += v;
    result.residuals[i] = fx[i] - result.base_value - total;
  });
  return result;
}

}  // namespace xpfn::shap
