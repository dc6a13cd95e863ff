// SPDX-License-Identifier: Apache-2.0
#include "csifb/quantizers.hpp"

#include <algorithm>
#include <cmath>

#include "csifb/errors.hpp"

namespace csifb {

void QuantizerSpec::validate() const {
  if (kind == QuantizerKind::binarize && bits != 1)
    throw ConfigError("binarize quantizer must have bits = 1");
  if (bits < 1) throw ConfigError("quantizer bits must be >= 1");
}

std::string QuantizerSpec::to_string() const {
  return kind == QuantizerKind::binarize ? "binarize" : "uniform:" + std::to_string(bits);
}

QuantizerSpec QuantizerSpec::parse(const std::string& text) {
  if (text == "binarize") return {QuantizerKind::binarize, 1};
  if (text.rfind("uniform:", 0) == 0) {
    QuantizerSpec s{QuantizerKind::uniform, 0};
    try {
      s.bits = std::stoi(text.substr(8));
    } catch (const std::exception&) {
      throw ConfigError("bad quantizer spec '" + text + "'");
    }
    s.validate();
    return s;
  }
  throw ConfigError("unknown quantizer '" + text + "' (expected binarize or uniform:<B>)");
}

double binarize(double x, Rng& stream) {
  if (!(std::abs(x) <= 1.0 + 1e-9)) throw ContractError("binarize: |x| > 1");
  x = std::clamp(x, -1.0, 1.0);
  const double u = stream.uniform();
  return u < (1.0 + x) / 2.0 ? 1.0 : -1.0;
}

double binarize_deterministic(double x) noexcept { return x >= 0.0 ? 1.0 : -1.0; }

double uniform_quantize(double x, int bits) {
  if (bits < 1) throw ContractError("uniform_quantize: bits must be >= 1");
  const double scale = std::ldexp(1.0, bits - 1);
  return std::round(x * scale) / scale;  // std::round ties away from zero
}

long long feedback_bits(long long l, const QuantizerSpec& spec) {
  if (l < 1) throw ContractError("feedback_bits: codeword dimension must be >= 1");
  spec.validate();
  return l * spec.effective_bits();
}

}  // namespace csifb
