// SPDX-License-Identifier: Apache-2.0
//
// Feedback-bit quantizers. Both are treated as identity in backpropagation
// (straight-through estimator).
#pragma once

#include <string>

#include "csifb/rng.hpp"

namespace csifb {

enum class QuantizerKind { binarize, uniform };

struct QuantizerSpec {
  QuantizerKind kind = QuantizerKind::binarize;
  int bits = 1;  // B; always 1 for binarize

  int effective_bits() const noexcept { return kind == QuantizerKind::binarize ? 1 : bits; }
  void validate() const;
  std::string to_string() const;
  static QuantizerSpec parse(const std::string& text);
};

/// Stochastic binarization: +1 with probability (1+x)/2, else -1. Consumes
/// exactly one uniform draw. |x| may exceed 1 by at most 1e-9 (clamped).
double binarize(double x, Rng& stream);

/// Inference-time binarization: sign(x), with sign(0) = +1.
double binarize_deterministic(double x) noexcept;

/// round(x * 2^(B-1)) / 2^(B-1), half away from zero.
double uniform_quantize(double x, int bits);

/// L * B.
long long feedback_bits(long long l, const QuantizerSpec& spec);

/// Straight-through: the quantizer's local gradient is 1.
template <typename T>
constexpr T straight_through_backward(T upstream) noexcept {
  return upstream;
}

}  // namespace csifb
