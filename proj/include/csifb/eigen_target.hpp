// SPDX-License-Identifier: Apache-2.0
//
// Feedback ground truth: dominant right singular vectors / subband
// eigenvectors, phase canonicalization and power spectral entropy.
#pragma once

#include <cstdint>
#include <string>

#include "csifb/channel_synth.hpp"
#include "csifb/types.hpp"

namespace csifb {

enum class EigenMode { single_rb, multi_rb };

struct EigenTarget {
  EigenMode mode = EigenMode::single_rb;
  /// nt x 1 in single_rb mode, nt x n_subbands in multi_rb mode; unit-norm
  /// columns in canonical phase.
  CMat v;
  std::string scene_id;
  std::uint64_t source_seed = 0;

  int nt() const noexcept { return static_cast<int>(v.rows()); }
  int n_subbands() const noexcept { return static_cast<int>(v.cols()); }
};

/// Rotates v so its first entry with modulus > 1e-12 is real and >= 0.
CVec canonical_phase(const CVec& v);

struct DominantVector {
  CVec v;
  double value;  // singular value (svd) or eigenvalue (evd)
};

/// Leading eigenpair of a Hermitian matrix; the eigenvector is unit norm and
/// canonical. For a degenerate top eigenvalue any unit vector of the top
/// eigenspace is returned.
DominantVector dominant_eigenvector(const CMat& hermitian);

/// Right singular vector of the largest singular value, via the EVD of H^H H.
DominantVector dominant_right_singular_vector(const CMat& h);

/// Mean of H^H H over the RBs of each subband, leading eigenvector per
/// subband, stacked as columns.
EigenTarget subband_eigenvectors(const ChannelSample& sample, int n_subbands);

/// Single-RB target from the first RB slice.
EigenTarget single_rb_target(const ChannelSample& sample);

/// Normalized entropy of |DFT(v)|^2 over nt bins, in [0, 1].
double pse(const CVec& v);

}  // namespace csifb
