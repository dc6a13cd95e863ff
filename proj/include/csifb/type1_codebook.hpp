// SPDX-License-Identifier: Apache-2.0
//
// Rank-1 Type I single-panel codebook: w = [b; phi*b] / sqrt(2*N1*N2),
// phi in {1, j, -1, -j}.
#pragma once

#include <vector>

#include "csifb/array_beams.hpp"
#include "csifb/types.hpp"

namespace csifb {

struct Type1Pmi {
  int theta1 = 0;
  int theta2 = 0;
  int phi_index = 0;  // phi = j^phi_index
  int flat_index = 0;

  static Type1Pmi from_flat(const ArrayConfig& config, int flat_index);
};

inline int type1_flat_index(const ArrayConfig& c, int theta1, int theta2, int phi_index) {
  return (theta1 * c.n2 * c.o2 + theta2) * 4 + phi_index;
}

class Type1Codebook {
 public:
  explicit Type1Codebook(const ArrayConfig& config);

  const ArrayConfig& config() const noexcept { return grid_.config(); }
  const BeamGrid& grid() const noexcept { return grid_; }
  int size() const noexcept { return 4 * grid_.size(); }

  /// Codeword at flat index; ContractError when out of range.
  CVec codeword(int flat_index) const;

  /// Maximizes |w^H v| over the codebook (all codewords have unit norm, so
  /// this is the cosine-similarity maximizer). Ties go to the lowest index.
  Type1Pmi encode(const CVec& v) const;
  CVec decode(const Type1Pmi& pmi) const { return codeword(pmi.flat_index); }

 private:
  BeamGrid grid_;
};

/// All codewords in flat-index order.
std::vector<CVec> enumerate_type1(const ArrayConfig& config);

/// ceil(log2(4*N1*O1*N2*O2)).
int overhead_type1(const ArrayConfig& config);

int ceil_log2(unsigned long long n);

}  // namespace csifb
