// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/scm/activation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "xpfn/common/error.hpp"

namespace xpfn::scm {

namespace {

constexpr std::array<const char*, kActivationCount> kNames = {
    "identity", "log", "sigmoid", "abs", "sin", "tanh", "rank", "square", "power", "softplus", "step", "modulo"};

}  // namespace

const char* to_string(Activation a) { return kNames[static_cast<std::size_t>(a)]; }

Activation parse_activation(const std::string& text) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (text == kNames[i]) return static_cast<Activation>(i);
  throw InvalidArgument("unknown activation '" + text + "'");
}

EdgeActivation sample_activation(Rng& rng) {
  EdgeActivation a;
  a.kind = static_cast<Activation>(uniform_index(rng, kActivationCount));
  if (a.kind == Activation::kPower) a.param = uniform_index(rng, 2) == 0 ? 2.0 : 3.0;
  if (a.kind == Activation::kModulo) a.param = uniform(rng, 0.5, 2.0);
  return a;
}

double apply_activation(const EdgeActivation& a, double x) {
  switch (a.kind) {
    case Activation::kIdentity:
      return x;
    case Activation::kLog:
      return std::log(std::abs(x) + kLogEpsilon);
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::kAbs:
      return std::abs(x);
    case Activation::kSin:
      return std::sin(x);
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kRank:
      throw InvalidArgument("rank is a column transform");
    case Activation::kSquare:
      return x * x;
    case Activation::kPower:
      return std::copysign(std::pow(std::abs(x), a.param), x);
    case Activation::kSoftplus:
      return x > 30.0 ? x : std::log1p(std::exp(x));
    case Activation::kStep:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::kModulo:
      return x - a.param * std::floor(x / a.param);
  }
  return x;
}

std::vector<double> apply_activation(const EdgeActivation& a, std::span<const double> column) {
  if (a.kind == Activation::kRank) return fractional_rank(column);
  std::vector<double> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) out[i] = apply_activation(a, column[i]);
  return out;
}

std::vector<double> fractional_rank(std::span<const double> column) {
  std::size_t n = column.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && column[order[j + 1]] == column[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;  // zero-based average rank
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = avg / static_cast<double>(n - 1);
    i = j + 1;
  }
  return out;
}

}  // namespace xpfn::scm
