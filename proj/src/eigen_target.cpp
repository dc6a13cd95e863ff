// SPDX-License-Identifier: Apache-2.0
#include "csifb/eigen_target.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "csifb/errors.hpp"

namespace csifb {

CVec canonical_phase(const CVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > 1e-12) return v * (std::conj(v[i]) / m);
  }
  throw DegenerateInputError("canonical_phase: zero vector");
}

DominantVector dominant_eigenvector(const CMat& hermitian) {
  if (hermitian.rows() != hermitian.cols() || hermitian.rows() == 0)
    throw ContractError("dominant_eigenvector: matrix must be square and nonempty");
  if (!hermitian.allFinite()) throw DegenerateInputError("dominant_eigenvector: non-finite input");
  // Tridiagonalization + implicit QR; eigenvalues ascending.
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian);
  if (es.info() != Eigen::Success) throw DegenerateInputError("dominant_eigenvector: EVD failed");
  const Eigen::Index top = hermitian.rows() - 1;
  const double lambda = es.eigenvalues()[top];
  if (!(lambda > 0)) throw DegenerateInputError("dominant_eigenvector: zero matrix");
  CVec v = es.eigenvectors().col(top);
  v.normalize();
  return {canonical_phase(v), lambda};
}

DominantVector dominant_right_singular_vector(const CMat& h) {
  if (h.size() == 0) throw ContractError("dominant_right_singular_vector: empty matrix");
  if (!h.allFinite()) throw DegenerateInputError("dominant_right_singular_vector: non-finite input");
  if (h.squaredNorm() == 0.0) throw DegenerateInputError("dominant_right_singular_vector: zero matrix");
  const CMat gram = h.adjoint() * h;
  DominantVector d = dominant_eigenvector(gram);
  d.value = std::sqrt(d.value);
  return d;
}

EigenTarget subband_eigenvectors(const ChannelSample& sample, int n_subbands) {
  const int n_rb = sample.n_rb();
  if (n_subbands < 1 || n_rb % n_subbands != 0)
    throw ConfigError("subband_eigenvectors: n_rb (" + std::to_string(n_rb) +
                      ") not divisible by n_subbands (" + std::to_string(n_subbands) + ")");
  const int per = n_rb / n_subbands;
  const Eigen::Index nt = sample.h.front().cols();
  EigenTarget t;
  t.mode = EigenMode::multi_rb;
  t.v.resize(nt, n_subbands);
  t.scene_id = sample.scene_id;
  t.source_seed = sample.seed_used;
  CMat acc(nt, nt);
  for (int s = 0; s < n_subbands; ++s) {
    acc.setZero();
    for (int n = 0; n < per; ++n) {
      const CMat& h = sample.h[s * per + n];
      acc.noalias() += h.adjoint() * h;
    }
    acc /= static_cast<double>(per);
    t.v.col(s) = dominant_eigenvector(acc).v;
  }
  return t;
}

EigenTarget single_rb_target(const ChannelSample& sample) {
  if (sample.h.empty()) throw ContractError("single_rb_target: empty sample");
  EigenTarget t;
  t.mode = EigenMode::single_rb;
  t.v = dominant_right_singular_vector(sample.h.front()).v;
  t.scene_id = sample.scene_id;
  t.source_seed = sample.seed_used;
  return t;
}

double pse(const CVec& v) {
  const Eigen::Index n = v.size();
  if (n == 0 || v.squaredNorm() == 0.0) throw DegenerateInputError("pse: zero vector");
  if (n == 1) return 0.0;
  RVec power(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cd acc = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += v[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / n);
    power[k] = std::norm(acc);
  }
  const double total = power.sum();
  double h = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double p = power[k] / total;
    if (p > 0) h -= p * std::log2(p);
  }
  return std::clamp(h / std::log2(static_cast<double>(n)), 0.0, 1.0);
}

}  // namespace csifb
