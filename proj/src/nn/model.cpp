// SPDX-License-Identifier: Apache-2.0
#include "csifb/nn/model.hpp"

#include "csifb/quantizers.hpp"

namespace csifb::nn {

namespace {
constexpr std::uint64_t kQuantStream = 0x51A7B1B5ull;
}

template <typename T>
Model<T>::Model(const ModelSpec& spec) : spec_(spec), quant_rng_(spec.init_seed ^ kQuantStream) {
  spec_.validate();
  Rng rng(spec_.init_seed);
  const int d = spec_.input_dim();
  const int h = spec_.fc_hidden();
  const int l = spec_.l;
  const double slope = spec_.leaky_slope;
  using A = Activation;
  if (spec_.arch == Architecture::bi_imcsinet) {
    const int widths[4] = {2 * spec_.nt, spec_.lstm_hidden1(), spec_.lstm_hidden2(), spec_.m()};
    lstm_.reserve(3);
    for (int k = 0; k < 3; ++k)
      lstm_.emplace_back("enc.bilstm" + std::to_string(k + 1), widths[k], widths[k + 1], rng);
  } else {
    enc_fc_.reserve(3);
    enc_fc_.emplace_back("enc.fc1", d, h, A::leaky_relu, slope, rng, "enc.bn1");
    enc_fc_.emplace_back("enc.fc2", h, h, A::leaky_relu, slope, rng, "enc.bn2");
    enc_fc_.emplace_back("enc.fc3", h, l, A::tanh, slope, rng, "enc.bn3");
  }
  dec_fc_.reserve(3);
  dec_fc_.emplace_back("dec.fc4", l, h, A::leaky_relu, slope, rng, "dec.bn4");
  dec_fc_.emplace_back("dec.fc5", h, h, A::leaky_relu, slope, rng, "dec.bn5");
  dec_fc_.emplace_back("dec.fc6", h, d, A::tanh, slope, rng, "dec.bn6");
  for (auto& b : enc_fc_) b.collect(params_);
  for (auto& b : lstm_) b.collect(params_);
  for (auto& b : dec_fc_) b.collect(params_);
}

template <typename T>
long long Model<T>::param_count() const {
  long long n = 0;
  for (const Param<T>* p : params_) n += p->value.size();
  return n;
}

template <typename T>
void Model<T>::zero_grad() {
  for (Param<T>* p : params_) p->grad.setZero();
}

template <typename T>
Mat<T> Model<T>::encode(const Mat<T>& x, Mode mode) {
  if (x.rows() != spec_.input_dim())
    throw ContractError("model input has " + std::to_string(x.rows()) + " rows, expected " +
                        std::to_string(spec_.input_dim()));
  if (spec_.arch != Architecture::bi_imcsinet) {
    Mat<T> a = x;
    for (auto& b : enc_fc_) a = b.forward(a, mode);
    return a;
  }
  const int nt = spec_.nt, ns = spec_.ns, n = nt * ns;
  std::vector<Mat<T>> seq(ns);
  for (int s = 0; s < ns; ++s) {
    seq[s].resize(2 * nt, x.cols());
    seq[s].topRows(nt) = x.middleRows(s * nt, nt);
    seq[s].bottomRows(nt) = x.middleRows(n + s * nt, nt);
  }
  for (auto& layer : lstm_) seq = layer.forward(seq, mode);
  const int m = spec_.m();
  Mat<T> z(spec_.l, x.cols());
  for (int s = 0; s < ns; ++s) z.middleRows(s * m, m) = seq[s];
  return z;
}

template <typename T>
Mat<T> Model<T>::quantize(const Mat<T>& z, Mode mode) {
  if (bypass_quantizer_) return z;
  const QuantizerSpec& q = spec_.quantizer;
  Mat<T> out(z.rows(), z.cols());
  if (q.kind == QuantizerKind::uniform) {
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        out(i, j) = static_cast<T>(uniform_quantize(static_cast<double>(z(i, j)), q.bits));
    return out;
  }
  const bool stochastic = mode == Mode::train || stochastic_eval_;
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double v = static_cast<double>(z(i, j));
      out(i, j) = static_cast<T>(stochastic ? binarize(v, quant_rng_) : binarize_deterministic(v));
    }
  return out;
}

template <typename T>
Mat<T> Model<T>::decode(const Mat<T>& codes, Mode mode) {
  Mat<T> a = codes;
  for (auto& b : dec_fc_) a = b.forward(a, mode);
  return a;
}

template <typename T>
ForwardResult<T> Model<T>::forward(const Mat<T>& x, Mode mode) {
  ForwardResult<T> r;
  r.codes = quantize(encode(x, mode), mode);
  r.output = decode(r.codes, mode);
  cached_ = mode == Mode::train;
  return r;
}

template <typename T>
Mat<T> Model<T>::backward(const Mat<T>& d_output) {
  if (!cached_) throw ContractError("Model::backward requires a preceding train-mode forward");
  Mat<T> g = d_output;
  for (auto it = dec_fc_.rbegin(); it != dec_fc_.rend(); ++it) g = it->backward(g);
  g = straight_through_backward(g);
  if (spec_.arch != Architecture::bi_imcsinet) {
    for (auto it = enc_fc_.rbegin(); it != enc_fc_.rend(); ++it) g = it->backward(g);
    return g;
  }
  const int nt = spec_.nt, ns = spec_.ns, n = nt * ns, m = spec_.m();
  std::vector<Mat<T>> seq(ns);
  for (int s = 0; s < ns; ++s) seq[s] = g.middleRows(s * m, m);
  for (auto it = lstm_.rbegin(); it != lstm_.rend(); ++it) seq = it->backward(seq);
  Mat<T> dx(2 * n, g.cols());
  for (int s = 0; s < ns; ++s) {
    dx.middleRows(s * nt, nt) = seq[s].topRows(nt);
    dx.middleRows(n + s * nt, nt) = seq[s].bottomRows(nt);
  }
  return dx;
}

template class Model<float>;
template class Model<double>;

}  // namespace csifb::nn
