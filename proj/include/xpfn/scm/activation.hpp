// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "xpfn/common/rng.hpp"

namespace xpfn::scm {

enum class Activation {
  kIdentity,
  kLog,       // log(|x| + 1e-8)
  kSigmoid,
  kAbs,
  kSin,
  kTanh,
  kRank,      // column-wise (average rank - 1) / (n - 1)
  kSquare,
  kPower,     // sign(x) |x|^e, e in {2, 3}
  kSoftplus,
  kStep,      // 1 if x > 0
  kModulo,    // x mod c, c in [0.5, 2]
};

inline constexpr std::size_t kActivationCount = 12;
inline constexpr double kLogEpsilon = 1e-8;

const char* to_string(Activation a);
Activation parse_activation(const std::string& text);

struct EdgeActivation {
  Activation kind = Activation::kIdentity;
  double param = 0.0;  // exponent for kPower, modulus for kModulo

  bool operator==(const EdgeActivation&) const = default;
};

// Uniform over the library, with kind-specific parameters drawn as needed.
EdgeActivation sample_activation(Rng& rng);

// Elementwise for every kind except kRank. Throws for kRank.
double apply_activation(const EdgeActivation& a, double x);
std::vector<double> apply_activation(const EdgeActivation& a, std::span<const double> column);

// Fractional ranks in [0, 1]; ties share their average rank.
std::vector<double> fractional_rank(std::span<const double> column);

}  // namespace xpfn::scm
