// SPDX-License-Identifier: Apache-2.0
#include "csifb/type2_codebook.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>

#include "csifb/errors.hpp"
#include "csifb/type1_codebook.hpp"

namespace csifb {

namespace {

int nearest_level_ties_up(double x, std::span<const double> levels) {
  int best = 0;
  double best_d = std::abs(x - levels[0]);
  for (int k = 1; k < static_cast<int>(levels.size()); ++k) {
    const double d = std::abs(x - levels[k]);
    if (d <= best_d) {  // ascending levels: equal distance moves to the larger
      best = k;
      best_d = d;
    }
  }
  return best;
}

int nearest_phase_ties_low(double angle, int n_points) {
  int best = 0;
  double best_d = 1e300;
  for (int k = 0; k < n_points; ++k) {
    double d = std::remainder(angle - 2.0 * std::numbers::pi * k / n_points, 2.0 * std::numbers::pi);
    d = std::abs(d);
    if (d < best_d) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

unsigned long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned long long>(n - k + i) / i;
  return r;
}

void Type2Config::validate(const ArrayConfig& array) const {
  if (k_beams < 1 || k_beams > array.ports_per_pol())
    throw ConfigError("Type II K=" + std::to_string(k_beams) + " outside [1, N1*N2=" +
                      std::to_string(array.ports_per_pol()) + "]");
}

int rotated_beam_position(const ArrayConfig& a, int q1, int q2, int basis_index) {
  const int ai = basis_index / a.n2;
  const int bi = basis_index % a.n2;
  return (q1 + a.o1 * ai) * (a.n2 * a.o2) + (q2 + a.o2 * bi);
}

BeamSelection select_beams(const BeamGrid& grid, const CMat& v_stack, const Type2Config& config) {
  const ArrayConfig& a = grid.config();
  config.validate(a);
  const int half = a.ports_per_pol();
  if (v_stack.rows() != 2 * half) throw ContractError("select_beams: row count != 2*N1*N2");
  const int nb = half;
  BeamSelection best;
  best.captured_power = -1.0;
  std::vector<double> score(nb);
  std::vector<int> order(nb);
  std::vector<double> best_profile(nb, -1.0);
  for (int q1 = 0; q1 < a.o1; ++q1) {
    for (int q2 = 0; q2 < a.o2; ++q2) {
      for (int i = 0; i < nb; ++i) {
        const CVec& b = grid[rotated_beam_position(a, q1, q2, i)];
        double s = 0.0;
        for (Eigen::Index c = 0; c < v_stack.cols(); ++c)
          s += std::norm(b.dot(v_stack.col(c).head(half))) +
               std::norm(b.dot(v_stack.col(c).tail(half)));
        score[i] = s;
      }
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int x, int y) { return score[x] > score[y]; });
      double captured = 0.0;
      for (int i = 0; i < config.k_beams; ++i) captured += score[order[i]];
      // Captured powers equal to rounding are ties; among ties the rotation
      // with the more concentrated sorted score profile wins, then the
      // lowest rotation index.
      const double tol = 1e-12 * std::max(captured, best.captured_power);
      bool better = captured > best.captured_power + tol;
      if (!better && captured >= best.captured_power - tol) {
        for (int i = 0; i < nb; ++i) {
          const double x = score[order[i]], y = best_profile[i];
          if (x > y + 1e-12 * captured) {
            better = true;
            break;
          }
          if (x < y - 1e-12 * captured) break;
        }
      }
      if (better) {
        for (int i = 0; i < nb; ++i) best_profile[i] = score[order[i]];
        best.q1 = q1;
        best.q2 = q2;
        best.captured_power = captured;
        best.beam_set.assign(order.begin(), order.begin() + config.k_beams);
        std::sort(best.beam_set.begin(), best.beam_set.end());
      }
    }
  }
  return best;
}

std::vector<CVec> type2_coefficients(const BeamGrid& grid, const CMat& v_stack,
                                     const BeamSelection& sel) {
  const ArrayConfig& a = grid.config();
  const int half = a.ports_per_pol();
  const int k = static_cast<int>(sel.beam_set.size());
  std::vector<CVec> coeffs(v_stack.cols(), CVec(2 * k));
  for (Eigen::Index s = 0; s < v_stack.cols(); ++s) {
    for (int i = 0; i < k; ++i) {
      const CVec& b = grid[rotated_beam_position(a, sel.q1, sel.q2, sel.beam_set[i])];
      // Same-rotation beams are orthogonal with squared norm N1*N2.
      coeffs[s][i] = b.dot(v_stack.col(s).head(half)) / static_cast<double>(half);
      coeffs[s][k + i] = b.dot(v_stack.col(s).tail(half)) / static_cast<double>(half);
    }
  }
  return coeffs;
}

Type2Report encode_type2(const BeamGrid& grid, const CMat& v_stack, const Type2Config& config) {
  const ArrayConfig& a = grid.config();
  config.validate(a);
  if (v_stack.cols() < 1) throw ContractError("encode_type2: no subbands");
  const BeamSelection sel = select_beams(grid, v_stack, config);
  const std::vector<CVec> c = type2_coefficients(grid, v_stack, sel);
  const int k = config.k_beams;
  const int nc = 2 * k;
  const int ns = static_cast<int>(v_stack.cols());

  Type2Report rep;
  rep.q1 = sel.q1;
  rep.q2 = sel.q2;
  rep.beam_set = sel.beam_set;
  rep.phase_mode = config.phase_mode;
  rep.subband_amplitude = config.subband_amplitude;

  std::vector<double> wb(nc, 0.0);
  for (int s = 0; s < ns; ++s)
    for (int j = 0; j < nc; ++j) wb[j] += std::abs(c[s][j]);
  for (double& x : wb) x /= ns;
  rep.strongest = static_cast<int>(std::max_element(wb.begin(), wb.end()) - wb.begin());
  const double ref = wb[rep.strongest];
  if (!(ref > 0)) throw DegenerateInputError("encode_type2: no power captured by selected beams");

  rep.wb_amp_codes.resize(nc);
  for (int j = 0; j < nc; ++j)
    rep.wb_amp_codes[j] = j == rep.strongest ? 7 : nearest_level_ties_up(wb[j] / ref, kWidebandAmpLevels);

  const int n_phase = 1 << phase_bits(config.phase_mode);
  rep.phase_codes.assign(ns, std::vector<int>(nc, 0));
  if (config.subband_amplitude) rep.sb_amp_codes.assign(ns, std::vector<int>(nc, 0));
  for (int s = 0; s < ns; ++s) {
    const cd anchor = c[s][rep.strongest];
    const cd unit = std::abs(anchor) > 0 ? std::conj(anchor) / std::abs(anchor) : cd(1, 0);
    for (int j = 0; j < nc; ++j) {
      if (rep.wb_amp_codes[j] == 0) continue;
      rep.phase_codes[s][j] = nearest_phase_ties_low(std::arg(c[s][j] * unit), n_phase);
      if (config.subband_amplitude) {
        const double ratio = std::abs(c[s][j]) / ref / kWidebandAmpLevels[rep.wb_amp_codes[j]];
        rep.sb_amp_codes[s][j] = nearest_level_ties_up(ratio, kSubbandAmpLevels);
      }
    }
  }
  rep.bit_cost = overhead_type2(rep, a);
  return rep;
}

void validate_report(const Type2Report& r, const ArrayConfig& a) {
  const int k = r.k();
  const int nc = 2 * k;
  auto bad = [](const std::string& w) { throw ContractError("malformed Type II report: " + w); };
  if (k < 1 || k > a.ports_per_pol()) bad("beam count");
  if (r.q1 < 0 || r.q1 >= a.o1 || r.q2 < 0 || r.q2 >= a.o2) bad("rotation");
  for (int i = 0; i < k; ++i) {
    if (r.beam_set[i] < 0 || r.beam_set[i] >= a.ports_per_pol()) bad("beam index");
    if (i > 0 && r.beam_set[i] <= r.beam_set[i - 1]) bad("beam set not strictly ascending");
  }
  if (r.strongest < 0 || r.strongest >= nc) bad("strongest index");
  if (static_cast<int>(r.wb_amp_codes.size()) != nc) bad("wideband amplitude count");
  for (int x : r.wb_amp_codes)
    if (x < 0 || x > 7) bad("wideband amplitude code");
  if (r.wb_amp_codes[r.strongest] != 7) bad("strongest coefficient not at level 1");
  if (r.phase_codes.empty()) bad("no subbands");
  const int n_phase = 1 << phase_bits(r.phase_mode);
  for (const auto& row : r.phase_codes) {
    if (static_cast<int>(row.size()) != nc) bad("phase row length");
    for (int x : row)
      if (x < 0 || x >= n_phase) bad("phase code");
  }
  if (r.subband_amplitude) {
    if (r.sb_amp_codes.size() != r.phase_codes.size()) bad("subband amplitude rows");
    for (const auto& row : r.sb_amp_codes) {
      if (static_cast<int>(row.size()) != nc) bad("subband amplitude row length");
      for (int x : row)
        if (x < 0 || x > 1) bad("subband amplitude code");
    }
  } else if (!r.sb_amp_codes.empty()) {
    bad("subband amplitudes present but disabled");
  }
}

std::vector<CVec> dequantize_type2(const Type2Report& r) {
  const int nc = 2 * r.k();
  const int n_phase = 1 << phase_bits(r.phase_mode);
  std::vector<CVec> out(r.n_subbands(), CVec::Zero(nc));
  for (int s = 0; s < r.n_subbands(); ++s) {
    for (int j = 0; j < nc; ++j) {
      double amp = kWidebandAmpLevels[r.wb_amp_codes[j]];
      if (amp == 0.0) continue;
      if (r.subband_amplitude) amp *= kSubbandAmpLevels[r.sb_amp_codes[s][j]];
      out[s][j] = std::polar(amp, 2.0 * std::numbers::pi * r.phase_codes[s][j] / n_phase);
    }
  }
  return out;
}

CMat decode_type2(const BeamGrid& grid, const Type2Report& r) {
  const ArrayConfig& a = grid.config();
  validate_report(r, a);
  const int half = a.ports_per_pol();
  const int k = r.k();
  const std::vector<CVec> coeffs = dequantize_type2(r);
  CMat w = CMat::Zero(2 * half, r.n_subbands());
  for (int s = 0; s < r.n_subbands(); ++s) {
    for (int i = 0; i < k; ++i) {
      const CVec& b = grid[rotated_beam_position(a, r.q1, r.q2, r.beam_set[i])];
      w.col(s).head(half) += b * coeffs[s][i];
      w.col(s).tail(half) += b * coeffs[s][k + i];
    }
    w.col(s).normalize();
  }
  return w;
}

int overhead_type2(const Type2Report& r, const ArrayConfig& a) {
  validate_report(r, a);
  const int k = r.k();
  int nonzero = 0;
  for (int x : r.wb_amp_codes) nonzero += x != 0;
  const int per_coeff = phase_bits(r.phase_mode) + (r.subband_amplitude ? 1 : 0);
  return ceil_log2(static_cast<unsigned long long>(a.o1) * a.o2) +
         ceil_log2(binomial(a.ports_per_pol(), k)) + ceil_log2(2ull * k) + 3 * (2 * k - 1) +
         r.n_subbands() * per_coeff * nonzero;
}

}  // namespace csifb
