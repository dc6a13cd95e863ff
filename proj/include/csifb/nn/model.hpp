// SPDX-License-Identifier: Apache-2.0
//
// ImCsiNet-s / ImCsiNet-m / bi-ImCsiNet: encoder -> quantizer -> decoder.
//
// Input and output are [Re(vec V); Im(vec V)] columns of length 2*nt*ns
// (vec stacks the subband columns). bi_imcsinet feeds step s the rows
// [Re(v_s); Im(v_s)] and reshapes its ns x M output step-major into L.
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "csifb/nn/layers.hpp"
#include "csifb/nn/model_spec.hpp"

namespace csifb::nn {

template <typename T>
struct ForwardResult {
  Mat<T> output;  // input_dim x batch, in (-1, 1)
  Mat<T> codes;   // L x batch, quantized codeword
};

template <typename T>
class Model {
 public:
  explicit Model(const ModelSpec& spec);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const noexcept { return spec_; }

  /// Train mode: BN batch statistics (running stats updated), stochastic
  /// binarization. Eval mode: running statistics, deterministic quantizers.
  ForwardResult<T> forward(const Mat<T>& x, Mode mode);

  /// Accumulates parameter gradients for d loss / d output; quantizers pass
  /// gradients straight through. Requires a preceding train-mode forward.
  /// Returns d loss / d input.
  Mat<T> backward(const Mat<T>& d_output);

  /// Encoder only (pre-quantization, after the final Tanh / LSTM).
  Mat<T> encode(const Mat<T>& x, Mode mode);
  Mat<T> quantize(const Mat<T>& z, Mode mode);
  Mat<T> decode(const Mat<T>& codes, Mode mode);

  /// Replace both quantizers by identity (gradient checks).
  void set_quantizer_bypass(bool bypass) noexcept { bypass_quantizer_ = bypass; }
  /// Use stochastic binarization in eval mode too.
  void set_stochastic_eval(bool on) noexcept { stochastic_eval_ = on; }
  void reseed_quantizer(std::uint64_t seed) { quant_rng_ = Rng(seed); }

  /// All parameter blocks (trainable and BN running statistics), stable order.
  const std::vector<Param<T>*>& params() const noexcept { return params_; }
  long long param_count() const;
  void zero_grad();

  /// Bi-LSTM encoder layers (empty for the FC architectures).
  std::vector<BiLstm<T>>& lstm_layers() noexcept { return lstm_; }

 private:
  ModelSpec spec_;
  std::vector<DenseBlock<T>> enc_fc_;
  std::vector<BiLstm<T>> lstm_;
  std::vector<DenseBlock<T>> dec_fc_;
  std::vector<Param<T>*> params_;
  Rng quant_rng_;
  bool bypass_quantizer_ = false;
  bool stochastic_eval_ = false;
  bool cached_ = false;
};

extern template class Model<float>;
extern template class Model<double>;

/// Copies parameter values between models of identical spec (any precision).
template <typename Dst, typename Src>
void copy_params(Model<Dst>& dst, const Model<Src>& src) {
  const auto& d = dst.params();
  const auto& s = src.params();
  if (d.size() != s.size()) throw ContractError("copy_params: parameter layout mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i]->value.rows() != s[i]->value.rows() || d[i]->value.cols() != s[i]->value.cols())
      throw ContractError("copy_params: shape mismatch at " + d[i]->name);
    d[i]->value = s[i]->value.template cast<Dst>();
  }
}

}  // namespace csifb::nn
