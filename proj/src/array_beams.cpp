// SPDX-License-Identifier: Apache-2.0
#include "csifb/array_beams.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "csifb/errors.hpp"

namespace csifb {

void ArrayConfig::validate() const {
  if (n1 < 1 || n2 < 1 || o1 < 1 || o2 < 1 || nr < 1) {
    throw ConfigError("array config fields must be >= 1 (n1=" + std::to_string(n1) +
                      " n2=" + std::to_string(n2) + " o1=" + std::to_string(o1) +
                      " o2=" + std::to_string(o2) + " nr=" + std::to_string(nr) + ")");
  }
}

CVec dft_vector(int n, int o, int theta) {
  if (n < 1 || o < 1) throw DomainError("dft_vector: n and o must be >= 1");
  if (theta < 0 || theta >= n * o) {
    throw DomainError("dft_vector: theta " + std::to_string(theta) + " outside [0, " +
                      std::to_string(n * o - 1) + "]");
  }
  CVec v(n);
  const double step = 2.0 * std::numbers::pi * theta / (n * o);
  for (int k = 0; k < n; ++k) v[k] = std::polar(1.0, step * k);
  return v;
}

BeamGrid::BeamGrid(const ArrayConfig& config) : config_(config) {
  config_.validate();
  const int h = config_.n1 * config_.o1;
  const int w = config_.n2 * config_.o2;
  beams_.reserve(h * w);
  std::vector<CVec> vert;
  vert.reserve(w);
  for (int t2 = 0; t2 < w; ++t2) vert.push_back(dft_vector(config_.n2, config_.o2, t2));
  for (int t1 = 0; t1 < h; ++t1) {
    const CVec hor = dft_vector(config_.n1, config_.o1, t1);
    for (int t2 = 0; t2 < w; ++t2) {
      CVec b(config_.n1 * config_.n2);
      for (int a = 0; a < config_.n1; ++a)
        for (int c = 0; c < config_.n2; ++c) b[a * config_.n2 + c] = hor[a] * vert[t2][c];
      beams_.push_back(std::move(b));
    }
  }
}

int BeamGrid::index(int theta1, int theta2) const {
  const int w = config_.n2 * config_.o2;
  if (theta1 < 0 || theta1 >= config_.n1 * config_.o1 || theta2 < 0 || theta2 >= w)
    throw DomainError("beam index out of range");
  return theta1 * w + theta2;
}

std::pair<int, int> BeamGrid::thetas(int index) const {
  if (index < 0 || index >= size()) throw DomainError("beam position out of range");
  const int w = config_.n2 * config_.o2;
  return {index / w, index % w};
}

CVec steering_vector(const ArrayConfig& config, double azimuth, double zenith, int polarization) {
  config.validate();
  if (polarization != 0 && polarization != 1)
    throw DomainError("polarization must be 0 or 1");
  const double sign = polarization == 0 ? 1.0 : -1.0;
  const double u = std::sin(zenith) * std::sin(azimuth);
  const double w = std::cos(zenith);
  CVec s(config.n1 * config.n2);
  for (int p1 = 0; p1 < config.n1; ++p1)
    for (int p2 = 0; p2 < config.n2; ++p2)
      s[p1 * config.n2 + p2] = sign * std::polar(1.0, std::numbers::pi * (p1 * u + p2 * w));
  return s;
}

}  // namespace csifb
