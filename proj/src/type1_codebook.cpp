// SPDX-License-Identifier: Apache-2.0
#include "csifb/type1_codebook.hpp"

#include <array>
#include <cmath>

#include "csifb/errors.hpp"

namespace csifb {

namespace {
const std::array<cd, 4> kPhi = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
}

int ceil_log2(unsigned long long n) {
  if (n == 0) throw ContractError("ceil_log2(0)");
  int bits = 0;
  while ((1ull << bits) < n) ++bits;
  return bits;
}

Type1Pmi Type1Pmi::from_flat(const ArrayConfig& c, int flat_index) {
  if (flat_index < 0 || flat_index >= 4 * c.grid_size())
    throw ContractError("Type I flat index " + std::to_string(flat_index) + " out of range");
  Type1Pmi p;
  p.flat_index = flat_index;
  p.phi_index = flat_index % 4;
  const int beam = flat_index / 4;
  p.theta1 = beam / (c.n2 * c.o2);
  p.theta2 = beam % (c.n2 * c.o2);
  return p;
}

Type1Codebook::Type1Codebook(const ArrayConfig& config) : grid_(config) {}

CVec Type1Codebook::codeword(int flat_index) const {
  const Type1Pmi p = Type1Pmi::from_flat(config(), flat_index);
  const CVec& b = grid_.beam(p.theta1, p.theta2);
  const Eigen::Index half = b.size();
  CVec w(2 * half);
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(half));
  w.head(half) = b * scale;
  w.tail(half) = b * (kPhi[p.phi_index] * scale);
  return w;
}

Type1Pmi Type1Codebook::encode(const CVec& v) const {
  const Eigen::Index half = config().ports_per_pol();
  if (v.size() != 2 * half)
    throw ContractError("encode_type1: vector length " + std::to_string(v.size()) +
                        " != 2*N1*N2 = " + std::to_string(2 * half));
  // w^H v = (b^H v0 + conj(phi) b^H v1) / sqrt(2 N1 N2); the scale is common.
  double best = -1.0;
  int best_index = 0;
  for (int beam = 0; beam < grid_.size(); ++beam) {
    const CVec& b = grid_[beam];
    const cd p0 = b.dot(v.head(half));
    const cd p1 = b.dot(v.tail(half));
    for (int k = 0; k < 4; ++k) {
      const double score = std::norm(p0 + std::conj(kPhi[k]) * p1);
      if (score > best) {
        best = score;
        best_index = beam * 4 + k;
      }
    }
  }
  return Type1Pmi::from_flat(config(), best_index);
}

std::vector<CVec> enumerate_type1(const ArrayConfig& config) {
  const Type1Codebook cb(config);
  std::vector<CVec> out;
  out.reserve(cb.size());
  for (int i = 0; i < cb.size(); ++i) out.push_back(cb.codeword(i));
  return out;
}

int overhead_type1(const ArrayConfig& config) {
  config.validate();
  return ceil_log2(4ull * config.grid_size());
}

}  // namespace csifb
