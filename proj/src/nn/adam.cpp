// SPDX-License-Identifier: Apache-2.0
#include "csifb/nn/adam.hpp"

#include <cmath>

namespace csifb::nn {

template <typename T>
Adam<T>::Adam(const std::vector<Param<T>*>& params, AdamConfig config) : config_(config) {
  for (Param<T>* p : params) {
    if (!p->trainable) continue;
    params_.push_back(p);
    m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
  const T step = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(config_.eps);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto g = params_[k]->grad.array();
    m_[k].array() = b1 * m_[k].array() + (T(1) - b1) * g;
    v_[k].array() = b2 * v_[k].array() + (T(1) - b2) * g.square();
    params_[k]->value.array() -= step * m_[k].array() / ((v_[k].array() * inv_c2).sqrt() + eps);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace csifb::nn
