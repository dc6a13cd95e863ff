// SPDX-License-Identifier: Apache-2.0
//
// Rank-1 Type II codebook over subbands: K orthogonal DFT beams from one
// rotation of the oversampled grid, shared by both polarizations, combined
// with quantized wideband amplitude, optional subband amplitude and
// per-subband phase.
#pragma once

#include <array>
#include <vector>

#include "csifb/array_beams.hpp"
#include "csifb/types.hpp"

namespace csifb {

enum class PhaseMode { qpsk, psk8 };

inline int phase_bits(PhaseMode m) noexcept { return m == PhaseMode::qpsk ? 2 : 3; }

/// Wideband amplitude levels, code 0..7.
inline constexpr std::array<double, 8> kWidebandAmpLevels = {
    0.0, 0.125, 0.17677669529663687, 0.25, 0.35355339059327373, 0.5, 0.70710678118654757, 1.0};
/// Subband amplitude levels, code 0..1.
inline constexpr std::array<double, 2> kSubbandAmpLevels = {0.70710678118654757, 1.0};

struct Type2Config {
  int k_beams = 4;
  PhaseMode phase_mode = PhaseMode::qpsk;
  bool subband_amplitude = false;

  void validate(const ArrayConfig& array) const;
};

struct Type2Report {
  int q1 = 0;
  int q2 = 0;
  /// Indices a*n2 + b into the orthogonal basis {beam(q1 + o1*a, q2 + o2*b)},
  /// ascending.
  std::vector<int> beam_set;
  /// Coefficient index r*K + i (polarization r, beam i) with wideband level 1.
  int strongest = 0;
  std::vector<int> wb_amp_codes;  // 2K
  /// n_subbands x 2K; empty when subband amplitude is disabled.
  std::vector<std::vector<int>> sb_amp_codes;
  std::vector<std::vector<int>> phase_codes;  // n_subbands x 2K
  PhaseMode phase_mode = PhaseMode::qpsk;
  bool subband_amplitude = false;
  int bit_cost = 0;

  int k() const noexcept { return static_cast<int>(beam_set.size()); }
  int n_subbands() const noexcept { return static_cast<int>(phase_codes.size()); }
};

struct BeamSelection {
  int q1 = 0;
  int q2 = 0;
  std::vector<int> beam_set;  // ascending basis indices
  double captured_power = 0.0;
};

/// Grid position of basis beam `basis_index` under rotation (q1, q2).
int rotated_beam_position(const ArrayConfig& array, int q1, int q2, int basis_index);

BeamSelection select_beams(const BeamGrid& grid, const CMat& v_stack, const Type2Config& config);

/// Unquantized per-subband least-squares coefficients c[s](r*K + i).
std::vector<CVec> type2_coefficients(const BeamGrid& grid, const CMat& v_stack,
                                     const BeamSelection& sel);

Type2Report encode_type2(const BeamGrid& grid, const CMat& v_stack, const Type2Config& config);

/// Dequantized coefficients (amplitude * phase), one vector of 2K per subband.
std::vector<CVec> dequantize_type2(const Type2Report& report);

/// 2*N1*N2 x n_subbands; unit-norm columns.
CMat decode_type2(const BeamGrid& grid, const Type2Report& report);

/// Bits of one report, recomputed from its codes.
int overhead_type2(const Type2Report& report, const ArrayConfig& array);

/// Throws ContractError if any field is malformed for this array.
void validate_report(const Type2Report& report, const ArrayConfig& array);

unsigned long long binomial(int n, int k);

}  // namespace csifb
