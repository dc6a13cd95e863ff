// SPDX-License-Identifier: Apache-2.0
#include "csifb/channel_synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "csifb/errors.hpp"
#include "csifb/rng.hpp"

namespace csifb {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

CVec rx_response(int nr, double aoa) {
  CVec a(nr);
  for (int r = 0; r < nr; ++r) a[r] = std::polar(1.0, std::numbers::pi * r * std::sin(aoa));
  return a;
}

}  // namespace

void SceneConfig::validate() const {
  array.validate();
  if (n_rb < 1 || n_subbands < 1) throw ConfigError("n_rb and n_subbands must be >= 1");
  if (n_rb % n_subbands != 0)
    throw ConfigError("n_rb (" + std::to_string(n_rb) + ") not divisible by n_subbands (" +
                      std::to_string(n_subbands) + ")");
  if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
  if (!(delay_spread > 0)) throw ConfigError("delay_spread must be > 0");
  if (!(angle_spread >= 0)) throw ConfigError("angle_spread must be >= 0");
  if (!(xpr > 0)) throw ConfigError("xpr must be > 0");
  if (!(zenith_hi >= zenith_lo)) throw ConfigError("zenith range is empty");
}

std::string SceneConfig::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "name=" << name << "\nn1=" << array.n1 << "\nn2=" << array.n2 << "\no1=" << array.o1
     << "\no2=" << array.o2 << "\nnr=" << array.nr << "\nn_rb=" << n_rb
     << "\nn_subbands=" << n_subbands << "\nn_paths=" << n_paths
     << "\ndelay_spread=" << delay_spread << "\ncarrier_hz=" << carrier_hz
     << "\nangle_spread=" << angle_spread << "\nsector_half_width=" << sector_half_width
     << "\nzenith_lo=" << zenith_lo << "\nzenith_hi=" << zenith_hi << "\nxpr=" << xpr
     << "\nseed=" << seed << "\n";
  return os.str();
}

std::uint64_t SceneConfig::digest() const { return fnv1a(canonical_text()); }

std::uint64_t drop_seed(std::uint64_t scene_seed, std::uint64_t drop_index) noexcept {
  return scene_seed ^ mix64(drop_index);
}

ChannelSample synth_channel(const SceneConfig& scene, std::uint64_t drop_index) {
  scene.validate();
  const ArrayConfig& arr = scene.array;
  const int nt = arr.nt();
  const int half = arr.ports_per_pol();
  const int nr = arr.nr;

  ChannelSample out;
  out.seed_used = drop_seed(scene.seed, drop_index);
  out.scene_id = scene.name;
  Rng rng(out.seed_used);

  const double az0 = rng.uniform(-scene.sector_half_width, scene.sector_half_width);
  const double ze0 = rng.uniform(scene.zenith_lo, scene.zenith_hi);
  const double aoa0 = rng.uniform(-std::numbers::pi, std::numbers::pi);

  struct Ray {
    CVec tx;  // length nt, both polarizations
    CVec rx;  // length nr
    double delay;
  };
  std::vector<Ray> rays;
  rays.reserve(scene.n_paths);
  const double cross = 1.0 / std::sqrt(scene.xpr);
  for (int p = 0; p < scene.n_paths; ++p) {
    const double az = az0 + rng.laplacian(scene.angle_spread);
    const double ze = ze0 + rng.laplacian(0.5 * scene.angle_spread);
    const double aoa = aoa0 + rng.laplacian(2.0 * scene.angle_spread);
    const double tau = rng.exponential(scene.delay_spread);
    const double amp = std::sqrt(std::exp(-tau / scene.delay_spread) / 2.0);
    // Slant +45 / -45 ports see (co + cross) and (co - cross) of the ray field.
    const cd g_co(amp * rng.normal(), amp * rng.normal());
    const cd g_x(cross * amp * rng.normal(), cross * amp * rng.normal());
    const CVec s0 = steering_vector(arr, az, ze, 0);
    const CVec s1 = steering_vector(arr, az, ze, 1);
    Ray ray;
    ray.tx.resize(nt);
    ray.tx.head(half) = (g_co * s0 + g_x * s0) / std::sqrt(2.0);
    ray.tx.tail(half) = (g_co * s0 + g_x * s1) / std::sqrt(2.0);
    ray.rx = rx_response(nr, aoa);
    ray.delay = tau;
    rays.push_back(std::move(ray));
  }

  out.h.assign(scene.n_rb, CMat::Zero(nr, nt));
  double power = 0.0;
  for (int n = 0; n < scene.n_rb; ++n) {
    const double f = n * kRbBandwidthHz;
    CMat& h = out.h[n];
    for (const Ray& ray : rays) {
      const cd phase = std::polar(1.0, -2.0 * std::numbers::pi * f * ray.delay);
      h.noalias() += (phase * ray.rx) * ray.tx.adjoint();
    }
    power += h.squaredNorm();
  }
  const double mean_power = power / (static_cast<double>(scene.n_rb) * nr * nt);
  if (!(mean_power > 0) || !std::isfinite(mean_power))
    throw DegenerateInputError("synth_channel produced a zero channel");
  const double scale = 1.0 / std::sqrt(mean_power);
  for (CMat& h : out.h) h *= scale;
  return out;
}

}  // namespace csifb
