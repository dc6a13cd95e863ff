// SPDX-License-Identifier: Apache-2.0
#include "csifb/nn/model_spec.hpp"

#include <cmath>

#include "csifb/errors.hpp"

namespace csifb::nn {

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::imcsinet_s: return "imcsinet_s";
    case Architecture::imcsinet_m: return "imcsinet_m";
    case Architecture::bi_imcsinet: return "bi_imcsinet";
  }
  return "?";
}

Architecture parse_architecture(const std::string& s) {
  if (s == "imcsinet_s") return Architecture::imcsinet_s;
  if (s == "imcsinet_m") return Architecture::imcsinet_m;
  if (s == "bi_imcsinet") return Architecture::bi_imcsinet;
  throw ConfigError("unknown architecture '" + s + "'");
}

int ModelSpec::fc_hidden() const noexcept {
  return arch == Architecture::imcsinet_s ? 16 * nt / width_divisor : 8 * nt * ns / width_divisor;
}

void ModelSpec::validate() const {
  if (nt < 1 || ns < 1) throw ConfigError("model: nt and ns must be >= 1");
  if (l < 1) throw ConfigError("model: codeword length L must be >= 1");
  if (width_divisor < 1) throw ConfigError("model: width_divisor must be >= 1");
  quantizer.validate();
  if (arch == Architecture::imcsinet_s && ns != 1) throw ConfigError("imcsinet_s requires ns = 1");
  if (arch == Architecture::bi_imcsinet && l % ns != 0)
    throw ConfigError("bi_imcsinet requires ns | L (L=" + std::to_string(l) +
                      ", ns=" + std::to_string(ns) + ")");
  if (fc_hidden() < 1 || (arch == Architecture::bi_imcsinet && lstm_hidden1() < 1))
    throw ConfigError("model: width_divisor leaves an empty hidden layer");
  if (!(leaky_slope >= 0.0)) throw ConfigError("model: leaky_slope must be >= 0");
}

int ModelSpec::codeword_length(double alpha, int nt, int ns) {
  return static_cast<int>(std::lround(alpha * 2.0 * nt * ns));
}

long long fc_params(long long in, long long out) { return out * (in + 1); }
long long fc_flops(long long in, long long out) { return out * (2 * in - 1); }
long long bn_params(long long out) { return 4 * out; }
long long fc_bn_params(long long in, long long out) { return out * (in + 5); }
long long lstm_params(long long in, long long out) { return 4 * (out * in + out * out + out); }
long long lstm_step_flops(long long in, long long out) { return 4 * out * (2 * (in + out) - 1); }

Complexity count_params_flops(const ModelSpec& spec) {
  spec.validate();
  Complexity c;
  auto add_fc = [&](const std::string& name, long long in, long long out, bool enc) {
    c.layers.push_back({name, fc_params(in, out) + bn_params(out), fc_flops(in, out), enc});
  };
  const long long d = spec.input_dim();
  const long long h = spec.fc_hidden();
  const long long l = spec.l;
  if (spec.arch == Architecture::bi_imcsinet) {
    const long long t = spec.ns;
    const long long widths[4] = {2LL * spec.nt, spec.lstm_hidden1(), spec.lstm_hidden2(), spec.m()};
    for (int k = 0; k < 3; ++k) {
      c.layers.push_back({"bilstm" + std::to_string(k + 1), 2 * lstm_params(widths[k], widths[k + 1]),
                          2 * t * lstm_step_flops(widths[k], widths[k + 1]), true});
    }
  } else {
    add_fc("fc1_bn1", d, h, true);
    add_fc("fc2_bn2", h, h, true);
    add_fc("fc3_bn3", h, l, true);
  }
  add_fc("fc4_bn4", l, h, false);
  add_fc("fc5_bn5", h, h, false);
  add_fc("fc6_bn6", h, d, false);
  for (const LayerCost& lc : c.layers) {
    c.params += lc.params;
    c.flops += lc.flops;
    (lc.encoder ? c.encoder_params : c.decoder_params) += lc.params;
  }
  return c;
}

namespace {

long long exact_div(long long num, long long den) {
  if (den <= 0) throw ContractError("closed form: alpha denominator must be positive");
  if (num % den != 0) throw ContractError("closed form does not evaluate to an integer for this alpha");
  return num / den;
}

}  // namespace

// Each closed form is evaluated as (polynomial * den) / den over integers.

long long closed_form_s_params(long long nt, Ratio a) {
  // (576 + 64a) nt^2 + (330 + 10a) nt
  return exact_div((576 * a.den + 64 * a.num) * nt * nt + (330 * a.den + 10 * a.num) * nt, a.den);
}

long long closed_form_s_flops(long long nt, Ratio a) {
  // (1152 + 128a) nt^2 - (66 + 2a) nt
  return exact_div((1152 * a.den + 128 * a.num) * nt * nt - (66 * a.den + 2 * a.num) * nt, a.den);
}

long long closed_form_m_params(long long nt, long long ns, Ratio a) {
  // (160 + 32a) ns^2 nt^2 + (170 + 10a) ns nt
  const long long x = ns * nt;
  return exact_div((160 * a.den + 32 * a.num) * x * x + (170 * a.den + 10 * a.num) * x, a.den);
}

long long closed_form_m_flops(long long nt, long long ns, Ratio a) {
  // (320 + 64a) ns^2 nt^2 - (34 + 2a) ns nt
  const long long x = ns * nt;
  return exact_div((320 * a.den + 64 * a.num) * x * x - (34 * a.den + 2 * a.num) * x, a.den);
}

long long closed_form_m_encoder_params(long long nt, long long ns, Ratio a) {
  // (80 + 16a) ns^2 nt^2 + (80 + 10a) ns nt
  const long long x = ns * nt;
  return exact_div((80 * a.den + 16 * a.num) * x * x + (80 * a.den + 10 * a.num) * x, a.den);
}

long long closed_form_bi_encoder_params(long long nt, Ratio a) {
  // (89 + 4a^2 + 2a) 8 nt^2 + (9 + 2a) 8 nt, over den^2
  const long long d2 = a.den * a.den;
  return exact_div((89 * d2 + 4 * a.num * a.num + 2 * a.num * a.den) * 8 * nt * nt +
                       (9 * d2 + 2 * a.num * a.den) * 8 * nt,
                   d2);
}

}  // namespace csifb::nn
