// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "csifb/nn/layers.hpp"

namespace csifb::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
template <typename T>
class Adam {
 public:
  Adam(const std::vector<Param<T>*>& params, AdamConfig config = {});

  /// Updates every trainable parameter from its accumulated gradient.
  void step(double lr);
  long long steps() const noexcept { return t_; }
  const std::vector<Mat<T>>& first_moment() const noexcept { return m_; }
  const std::vector<Mat<T>>& second_moment() const noexcept { return v_; }

 private:
  std::vector<Param<T>*> params_;
  AdamConfig config_;
  std::vector<Mat<T>> m_, v_;
  long long t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace csifb::nn
