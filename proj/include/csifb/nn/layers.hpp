// SPDX-License-Identifier: Apache-2.0
//
// Layer building blocks. Activations are laid out features x batch (one
// sample per column). Each layer caches what its backward pass needs during
// a train-mode forward; gradients accumulate into Param::grad.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "csifb/errors.hpp"
#include "csifb/rng.hpp"

namespace csifb::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Mode { train, eval };

template <typename T>
struct Param {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols, bool train = true)
      : name(std::move(n)), value(Mat<T>::Zero(rows, cols)), grad(Mat<T>::Zero(rows, cols)),
        trainable(train) {}
};

/// Glorot-style symmetric uniform init in +/- sqrt(6 / (fan_in + fan_out)).
template <typename T>
void init_uniform(Mat<T>& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
class Dense {
 public:
  Dense(const std::string& name, int in, int out, Rng& rng)
      : w_(name + ".weight", out, in), b_(name + ".bias", out, 1) {
    init_uniform(w_.value, rng);
  }

  Mat<T> forward(const Mat<T>& x, Mode mode) {
    if (mode == Mode::train) x_ = x;
    cached_ = mode == Mode::train;
    Mat<T> y = w_.value * x;
    y.colwise() += b_.value.col(0);
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) {
    if (!cached_) throw ContractError("Dense::backward without a train-mode forward");
    w_.grad.noalias() += dy * x_.transpose();
    b_.grad.col(0) += dy.rowwise().sum();
    return w_.value.transpose() * dy;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }
  int in() const { return static_cast<int>(w_.value.cols()); }
  int out() const { return static_cast<int>(w_.value.rows()); }

 private:
  Param<T> w_, b_;
  Mat<T> x_;
  bool cached_ = false;
};

template <typename T>
class BatchNorm {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.99;

  BatchNorm(const std::string& name, int n)
      : gamma_(name + ".gamma", n, 1), beta_(name + ".beta", n, 1),
        mean_(name + ".running_mean", n, 1, false), var_(name + ".running_var", n, 1, false) {
    gamma_.value.setOnes();
    var_.value.setOnes();
  }

  Mat<T> forward(const Mat<T>& x, Mode mode) {
    const Eigen::Index n = x.cols();
    if (mode == Mode::eval) {
      cached_ = false;
      const Vec<T> inv = (var_.value.col(0).array() + T(kEps)).rsqrt().matrix();
      const Vec<T> scale = gamma_.value.col(0).cwiseProduct(inv);
      const Vec<T> shift = beta_.value.col(0) - mean_.value.col(0).cwiseProduct(scale);
      Mat<T> y = scale.asDiagonal() * x;
      y.colwise() += shift;
      return y;
    }
    const Vec<T> mu = x.rowwise().mean();
    xhat_ = x.colwise() - mu;
    const Vec<T> var = xhat_.array().square().rowwise().sum().matrix() / static_cast<T>(n);
    inv_std_ = (var.array() + T(kEps)).rsqrt().matrix();
    xhat_ = inv_std_.asDiagonal() * xhat_;
    mean_.value.col(0) = T(kMomentum) * mean_.value.col(0) + T(1 - kMomentum) * mu;
    var_.value.col(0) = T(kMomentum) * var_.value.col(0) + T(1 - kMomentum) * var;
    cached_ = true;
    Mat<T> y = gamma_.value.col(0).asDiagonal() * xhat_;
    y.colwise() += beta_.value.col(0);
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) {
    if (!cached_) throw ContractError("BatchNorm::backward without a train-mode forward");
    const T n = static_cast<T>(dy.cols());
    gamma_.grad.col(0) += dy.cwiseProduct(xhat_).rowwise().sum();
    beta_.grad.col(0) += dy.rowwise().sum();
    const Mat<T> dxhat = gamma_.value.col(0).asDiagonal() * dy;
    const Vec<T> sum_d = dxhat.rowwise().sum();
    const Vec<T> sum_dx = dxhat.cwiseProduct(xhat_).rowwise().sum();
    Mat<T> dx = dxhat * n;
    dx.colwise() -= sum_d;
    dx -= sum_dx.asDiagonal() * xhat_;
    return (inv_std_ / n).asDiagonal() * dx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&mean_);
    out.push_back(&var_);
  }

 private:
  Param<T> gamma_, beta_, mean_, var_;
  Mat<T> xhat_;
  Vec<T> inv_std_;
  bool cached_ = false;
};

enum class Activation { leaky_relu, tanh };

template <typename T>
class ActivationLayer {
 public:
  ActivationLayer(Activation kind, double slope) : kind_(kind), slope_(static_cast<T>(slope)) {}

  Mat<T> forward(const Mat<T>& x, Mode mode) {
    Mat<T> y;
    if (kind_ == Activation::tanh) {
      y = x.array().tanh().matrix();
    } else {
      y = x.unaryExpr([s = slope_](T v) { return v >= T(0) ? v : s * v; });
    }
    cached_ = mode == Mode::train;
    if (cached_) cache_ = kind_ == Activation::tanh ? y : x;
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) const {
    if (!cached_) throw ContractError("activation backward without a train-mode forward");
    if (kind_ == Activation::tanh)
      return dy.cwiseProduct((T(1) - cache_.array().square()).matrix());
    return dy.binaryExpr(cache_, [s = slope_](T g, T v) { return v >= T(0) ? g : s * g; });
  }

 private:
  Activation kind_;
  T slope_;
  Mat<T> cache_;
  bool cached_ = false;
};

/// Dense -> BatchNorm -> activation.
template <typename T>
class DenseBlock {
 public:
  DenseBlock(const std::string& name, int in, int out, Activation act, double slope, Rng& rng,
             const std::string& bn_name)
      : fc_(name, in, out, rng), bn_(bn_name, out), act_(act, slope) {}

  Mat<T> forward(const Mat<T>& x, Mode mode) {
    return act_.forward(bn_.forward(fc_.forward(x, mode), mode), mode);
  }
  Mat<T> backward(const Mat<T>& dy) { return fc_.backward(bn_.backward(act_.backward(dy))); }
  void collect(std::vector<Param<T>*>& out) {
    fc_.collect(out);
    bn_.collect(out);
  }

 private:
  Dense<T> fc_;
  BatchNorm<T> bn_;
  ActivationLayer<T> act_;
};

/// One LSTM direction. Gate rows are ordered [input; forget; candidate;
/// output], each of height H.
template <typename T>
class LstmDirection {
 public:
  LstmDirection(const std::string& name, int in, int hidden, Rng& rng)
      : w_(name + ".kernel", 4 * hidden, in), u_(name + ".recurrent_kernel", 4 * hidden, hidden),
        b_(name + ".bias", 4 * hidden, 1), h_(hidden) {
    init_uniform(w_.value, rng);
    init_uniform(u_.value, rng);
    b_.value.block(hidden, 0, hidden, 1).setOnes();
  }

  /// xs[t] is in x batch; reverse processes t = T-1 .. 0. Returns h aligned to
  /// the original time order.
  std::vector<Mat<T>> forward(const std::vector<Mat<T>>& xs, bool reverse, Mode mode) {
    const int steps = static_cast<int>(xs.size());
    const Eigen::Index batch = xs.front().cols();
    const int hs = h_;
    std::vector<Mat<T>> hs_out(steps);
    Mat<T> h = Mat<T>::Zero(hs, batch), c = Mat<T>::Zero(hs, batch);
    const bool keep = mode == Mode::train;
    reverse_ = reverse;
    if (keep) {
      xs_ = xs;
      gates_.assign(steps, Mat<T>());
      cells_.assign(steps, Mat<T>());
      hprev_.assign(steps, Mat<T>());
      cprev_.assign(steps, Mat<T>());
    }
    for (int k = 0; k < steps; ++k) {
      const int t = reverse ? steps - 1 - k : k;
      Mat<T> z = w_.value * xs[t];
      z.noalias() += u_.value * h;
      z.colwise() += b_.value.col(0);
      auto sig = [](T v) { return T(1) / (T(1) + std::exp(-v)); };
      z.topRows(2 * hs) = z.topRows(2 * hs).unaryExpr(sig);
      z.middleRows(2 * hs, hs) = z.middleRows(2 * hs, hs).array().tanh().matrix();
      z.bottomRows(hs) = z.bottomRows(hs).unaryExpr(sig);
      Mat<T> c_new = z.middleRows(hs, hs).cwiseProduct(c) +
                     z.topRows(hs).cwiseProduct(z.middleRows(2 * hs, hs));
      Mat<T> h_new = z.bottomRows(hs).cwiseProduct(c_new.array().tanh().matrix());
      if (keep) {
        gates_[t] = z;
        cprev_[t] = c;
        hprev_[t] = h;
        cells_[t] = c_new;
      }
      c = std::move(c_new);
      h = std::move(h_new);
      hs_out[t] = h;
    }
    cached_ = keep;
    return hs_out;
  }

  /// dh[t] is the loss gradient on h_t (original time order). Returns dx[t].
  std::vector<Mat<T>> backward(const std::vector<Mat<T>>& dh) {
    if (!cached_) throw ContractError("LSTM backward without a train-mode forward");
    const int steps = static_cast<int>(dh.size());
    const int hs = h_;
    const Eigen::Index batch = dh.front().cols();
    std::vector<Mat<T>> dx(steps);
    Mat<T> dh_next = Mat<T>::Zero(hs, batch), dc_next = Mat<T>::Zero(hs, batch);
    Mat<T> dz(4 * hs, batch);
    for (int k = steps - 1; k >= 0; --k) {
      const int t = reverse_ ? steps - 1 - k : k;
      const Mat<T>& z = gates_[t];
      const auto i = z.topRows(hs).array();
      const auto f = z.middleRows(hs, hs).array();
      const auto g = z.middleRows(2 * hs, hs).array();
      const auto o = z.bottomRows(hs).array();
      const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic> tc = cells_[t].array().tanh();
      const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic> dht = (dh[t] + dh_next).array();
      const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic> dc =
          dht * o * (T(1) - tc.square()) + dc_next.array();
      dz.topRows(hs) = (dc * g * i * (T(1) - i)).matrix();
      dz.middleRows(hs, hs) = (dc * cprev_[t].array() * f * (T(1) - f)).matrix();
      dz.middleRows(2 * hs, hs) = (dc * i * (T(1) - g.square())).matrix();
      dz.bottomRows(hs) = (dht * tc * o * (T(1) - o)).matrix();
      dc_next = (dc * f).matrix();
      w_.grad.noalias() += dz * xs_[t].transpose();
      u_.grad.noalias() += dz * hprev_[t].transpose();
      b_.grad.col(0) += dz.rowwise().sum();
      dx[t] = w_.value.transpose() * dz;
      dh_next = u_.value.transpose() * dz;
    }
    return dx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w_);
    out.push_back(&u_);
    out.push_back(&b_);
  }
  int hidden() const { return h_; }

 private:
  Param<T> w_, u_, b_;
  int h_;
  bool reverse_ = false;
  bool cached_ = false;
  std::vector<Mat<T>> xs_, gates_, cells_, hprev_, cprev_;
};

/// Bidirectional LSTM whose output at step t is the mean of the forward
/// hidden state and the time-realigned backward hidden state.
template <typename T>
class BiLstm {
 public:
  BiLstm(const std::string& name, int in, int hidden, Rng& rng)
      : fwd_(name + ".forward", in, hidden, rng), bwd_(name + ".backward", in, hidden, rng) {}

  std::vector<Mat<T>> forward(const std::vector<Mat<T>>& xs, Mode mode) {
    std::vector<Mat<T>> a = fwd_.forward(xs, false, mode);
    const std::vector<Mat<T>> b = bwd_.forward(xs, true, mode);
    for (std::size_t t = 0; t < a.size(); ++t) a[t] = (a[t] + b[t]) * T(0.5);
    return a;
  }

  std::vector<Mat<T>> backward(const std::vector<Mat<T>>& dy) {
    std::vector<Mat<T>> half(dy.size());
    for (std::size_t t = 0; t < dy.size(); ++t) half[t] = dy[t] * T(0.5);
    std::vector<Mat<T>> dx = fwd_.backward(half);
    const std::vector<Mat<T>> dxb = bwd_.backward(half);
    for (std::size_t t = 0; t < dx.size(); ++t) dx[t] += dxb[t];
    return dx;
  }

  void collect(std::vector<Param<T>*>& out) {
    fwd_.collect(out);
    bwd_.collect(out);
  }
  LstmDirection<T>& forward_direction() { return fwd_; }
  LstmDirection<T>& backward_direction() { return bwd_; }

 private:
  LstmDirection<T> fwd_, bwd_;
};

}  // namespace csifb::nn
