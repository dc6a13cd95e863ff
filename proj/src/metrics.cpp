// SPDX-License-Identifier: Apache-2.0
#include "csifb/metrics.hpp"

#include <cmath>

#include "csifb/errors.hpp"

namespace csifb {

double cosine_similarity(const CVec& v, const CVec& v_hat) {
  if (v.size() != v_hat.size()) throw ContractError("cosine_similarity: length mismatch");
  const double nv = v.norm();
  const double nh = v_hat.norm();
  if (nv == 0.0 || nh == 0.0) throw DegenerateInputError("cosine_similarity: zero vector");
  return std::min(1.0, std::abs(v_hat.dot(v)) / (nv * nh));
}

SimilarityReport stacked_cosine_similarity(const CMat& v_stack, const CMat& v_stack_hat) {
  if (v_stack.rows() != v_stack_hat.rows() || v_stack.cols() != v_stack_hat.cols())
    throw ContractError("stacked_cosine_similarity: shape mismatch");
  if (v_stack.cols() == 0) throw ContractError("stacked_cosine_similarity: no columns");
  SimilarityReport r;
  r.n_samples = 1;
  r.per_subband.reserve(v_stack.cols());
  double sum = 0.0;
  for (Eigen::Index s = 0; s < v_stack.cols(); ++s) {
    const double c = cosine_similarity(v_stack.col(s), v_stack_hat.col(s));
    r.per_subband.push_back(c);
    sum += c;
  }
  r.rho = sum / static_cast<double>(v_stack.cols());
  return r;
}

double loss_single(std::span<const CVec> v, std::span<const CVec> v_hat) {
  if (v.empty()) throw ContractError("loss_single: empty batch");
  if (v.size() != v_hat.size()) throw ContractError("loss_single: batch size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += cosine_similarity(v[i], v_hat[i]);
  return -sum / static_cast<double>(v.size());
}

double loss_multi(std::span<const CMat> v, std::span<const CMat> v_hat) {
  if (v.empty()) throw ContractError("loss_multi: empty batch");
  if (v.size() != v_hat.size()) throw ContractError("loss_multi: batch size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += stacked_cosine_similarity(v[i], v_hat[i]).rho;
  return -sum / static_cast<double>(v.size());
}

void SimilarityAccumulator::add(const CMat& v_stack, const CMat& v_stack_hat) {
  const SimilarityReport r = stacked_cosine_similarity(v_stack, v_stack_hat);
  if (column_sums_.empty()) column_sums_.assign(r.per_subband.size(), 0.0);
  if (column_sums_.size() != r.per_subband.size())
    throw ContractError("SimilarityAccumulator: subband count changed");
  for (std::size_t s = 0; s < r.per_subband.size(); ++s) column_sums_[s] += r.per_subband[s];
  per_sample_.push_back(r.rho);
}

SimilarityReport SimilarityAccumulator::report() const {
  SimilarityReport r;
  r.n_samples = static_cast<int>(per_sample_.size());
  if (per_sample_.empty()) return r;
  double sum = 0.0;
  for (double x : per_sample_) sum += x;
  r.rho = sum / static_cast<double>(per_sample_.size());
  for (double c : column_sums_) r.per_subband.push_back(c / static_cast<double>(per_sample_.size()));
  return r;
}

CMat unpack_real(std::span<const double> x, int nt, int ns) {
  const std::size_t n = static_cast<std::size_t>(nt) * ns;
  if (x.size() != 2 * n) throw ContractError("unpack_real: length mismatch");
  CMat v(nt, ns);
  for (std::size_t k = 0; k < n; ++k) v(k % nt, k / nt) = cd(x[k], x[n + k]);
  return v;
}

RVec pack_real(const CMat& v) {
  const Eigen::Index n = v.size();
  RVec x(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const cd z = v(k % v.rows(), k / v.rows());
    x[k] = z.real();
    x[n + k] = z.imag();
  }
  return x;
}

double cosine_loss_and_grad(std::span<const double> x, std::span<const double> x_hat, int nt,
                            int ns, std::span<double> grad_out) {
  const std::size_t n = static_cast<std::size_t>(nt) * ns;
  if (x.size() != 2 * n || x_hat.size() != 2 * n || grad_out.size() != 2 * n)
    throw ContractError("cosine_loss_and_grad: length mismatch");
  double loss = 0.0;
  const double inv_ns = 1.0 / ns;
  for (int s = 0; s < ns; ++s) {
    const std::size_t off = static_cast<std::size_t>(s) * nt;
    // z = v_hat^H v, with v_hat = a + jb and v = c + jd.
    double zr = 0, zi = 0, nh2 = 0, nv2 = 0;
    for (int k = 0; k < nt; ++k) {
      const double a = x_hat[off + k], b = x_hat[n + off + k];
      const double c = x[off + k], d = x[n + off + k];
      zr += a * c + b * d;
      zi += a * d - b * c;
      nh2 += a * a + b * b;
      nv2 += c * c + d * d;
    }
    const double nh = std::sqrt(nh2), nv = std::sqrt(nv2);
    const double mag = std::hypot(zr, zi);
    if (nv == 0.0) {
      for (int k = 0; k < nt; ++k) grad_out[off + k] = grad_out[n + off + k] = 0.0;
      continue;
    }
    if (nh == 0.0) {
      // rho is undefined at v_hat = 0; step along v, the direction of
      // steepest one-sided increase.
      for (int k = 0; k < nt; ++k) {
        grad_out[off + k] = -inv_ns * x[off + k] / nv;
        grad_out[n + off + k] = -inv_ns * x[n + off + k] / nv;
      }
      continue;
    }
    const double rho = mag / (nh * nv);
    loss -= rho * inv_ns;
    // d|z|/da_k = Re(conj(z) v_k)/|z|, d|z|/db_k = Im(conj(z) v_k)/|z|.
    const double g_mag = mag > 0 ? 1.0 / (mag * nh * nv) : 0.0;
    const double g_norm = rho / nh2;
    for (int k = 0; k < nt; ++k) {
      const double a = x_hat[off + k], b = x_hat[n + off + k];
      const double c = x[off + k], d = x[n + off + k];
      const double re = zr * c + zi * d;  // Re(conj(z) v)
      const double im = zr * d - zi * c;  // Im(conj(z) v)
      grad_out[off + k] = -inv_ns * (re * g_mag - g_norm * a);
      grad_out[n + off + k] = -inv_ns * (im * g_mag - g_norm * b);
    }
  }
  return loss;
}

}  // namespace csifb
