// SPDX-License-Identifier: Apache-2.0
//
// Clustered geometric multipath channel for a cross-polarized planar array.
//
// Per drop: one cluster centre (azimuth/zenith of departure, azimuth of
// arrival), n_paths rays scattered around it with Laplacian angular spread,
// exponentially distributed delays with exponential power-delay profile,
// and independent complex gains for the two polarizations of each ray.
// RB n sits at f_n = n * 180 kHz relative to the carrier. The whole drop is
// scaled so the mean per-entry power over all RBs is exactly 1.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csifb/array_beams.hpp"
#include "csifb/types.hpp"

namespace csifb {

inline constexpr double kRbBandwidthHz = 180e3;

struct SceneConfig {
  std::string name = "scene";
  ArrayConfig array{};
  int n_rb = 1;
  int n_subbands = 1;
  int n_paths = 20;
  double delay_spread = 300e-9;
  double carrier_hz = 4e9;
  /// Laplacian scale of ray angles around the cluster centre (radians).
  double angle_spread = 0.1;
  /// Cluster-centre azimuth of departure drawn uniformly in +/- this (radians).
  double sector_half_width = 1.0471975511965976;  // 60 deg
  /// Cluster-centre zenith of departure drawn uniformly in [lo, hi] (radians).
  double zenith_lo = 1.3962634015954636;  // 80 deg
  double zenith_hi = 1.9198621771937625;  // 110 deg
  /// Cross-polarization power ratio (linear); co-pol over cross-pol.
  double xpr = 8.0;
  std::uint64_t seed = 1;

  void validate() const;
  /// Canonical key=value rendering; the scene digest is FNV-1a of this text.
  std::string canonical_text() const;
  std::uint64_t digest() const;
};

struct ChannelSample {
  /// One nr x nt matrix per RB.
  std::vector<CMat> h;
  std::uint64_t seed_used = 0;
  std::string scene_id;

  int n_rb() const noexcept { return static_cast<int>(h.size()); }
};

/// Seed for one drop: scene seed xor mix64(drop_index).
std::uint64_t drop_seed(std::uint64_t scene_seed, std::uint64_t drop_index) noexcept;

ChannelSample synth_channel(const SceneConfig& scene, std::uint64_t drop_index);

}  // namespace csifb
