// SPDX-License-Identifier: Apache-2.0
//
// Cross-polarized uniform planar array geometry and the oversampled 2D DFT
// grid of beams shared by the Type I / Type II codebooks and the channel model.
#pragma once

#include <vector>

#include "csifb/types.hpp"

namespace csifb {

struct ArrayConfig {
  int n1 = 2;  // ports per polarization, horizontal
  int n2 = 2;  // ports per polarization, vertical
  int o1 = 4;
  int o2 = 4;
  int nr = 2;

  int nt() const noexcept { return 2 * n1 * n2; }
  int ports_per_pol() const noexcept { return n1 * n2; }
  int grid_size() const noexcept { return n1 * o1 * n2 * o2; }

  /// Throws ConfigError unless every field is strictly positive.
  void validate() const;
};

/// Element k is exp(j*2*pi*theta*k/(n*o)).
CVec dft_vector(int n, int o, int theta);

class BeamGrid {
 public:
  explicit BeamGrid(const ArrayConfig& config);

  const ArrayConfig& config() const noexcept { return config_; }
  int size() const noexcept { return static_cast<int>(beams_.size()); }

  /// Row-major over (theta1, theta2), theta2 fastest.
  int index(int theta1, int theta2) const;
  std::pair<int, int> thetas(int index) const;

  const CVec& beam(int theta1, int theta2) const { return beams_[index(theta1, theta2)]; }
  const CVec& operator[](int index) const { return beams_.at(index); }

 private:
  ArrayConfig config_;
  std::vector<CVec> beams_;
};

inline BeamGrid beam_grid(const ArrayConfig& config) { return BeamGrid(config); }

/// Planar-array response for one polarization, half-wavelength spacing.
/// Port (p1, p2) sits at position p1*n2 + p2 (same order as the DFT beams).
/// Polarization 1 (the -45 degree slant) carries a sign flip relative to
/// polarization 0.
CVec steering_vector(const ArrayConfig& config, double azimuth, double zenith, int polarization);

}  // namespace csifb
