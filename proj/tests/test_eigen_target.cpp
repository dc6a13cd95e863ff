// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "csifb/eigen_target.hpp"
#include "csifb/errors.hpp"
#include "csifb/metrics.hpp"
#include "test_util.hpp"

using namespace csifb;

namespace {

const cd J(0.0, 1.0);

// Independent oracle: shifted power iteration on a Hermitian PSD matrix.
CVec power_iteration(const CMat& a, double tol = 1e-13, int max_iter = 200000) {
  CVec v = CVec::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  v(0) += 0.1;
  v.normalize();
  for (int it = 0; it < max_iter; ++it) {
    CVec w = a * v;
    w.normalize();
    const double delta = 1.0 - std::abs(w.dot(v));
    v = w;
    if (delta < tol) break;
  }
  return v;
}

// Unnormalized DFT written out directly, independent of the library code.
CVec idft_from_bins(const std::vector<cd>& bins) {
  const int n = static_cast<int>(bins.size());
  CVec v(n);
  for (int k = 0; k < n; ++k) {
    cd s = 0;
    for (int i = 0; i < n; ++i) s += bins[i] * std::exp(J * (2.0 * std::numbers::pi * i * k / n));
    v(k) = s / static_cast<double>(n);
  }
  return v;
}

ChannelSample sample_from(const std::vector<CMat>& h) {
  ChannelSample s;
  s.h = h;
  return s;
}

void expect_canonical(const CVec& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      EXPECT_NEAR(v(i).imag(), 0.0, 1e-12);
      EXPECT_GE(v(i).real(), 0.0);
      return;
    }
  }
}

}  // namespace

TEST(DominantSvd, DiagonalCase) {
  CMat h(2, 2);
  h << 2, 0, 0, 1;
  const DominantVector d = dominant_right_singular_vector(h);
  EXPECT_NEAR(d.value, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(d.v(0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d.v(1)), 0.0, 1e-12);
}

TEST(DominantSvd, RankOneOuterProduct) {
  Rng rng(5);
  const CVec u = test::random_cvec(rng, 4);
  const CVec a = test::random_unit(rng, 8);
  const CMat h = u * a.adjoint();
  const DominantVector d = dominant_right_singular_vector(h);
  EXPECT_NEAR(cosine_similarity(a, d.v), 1.0, 1e-12);
  EXPECT_NEAR(d.value, u.norm(), 1e-10 * u.norm());
}

TEST(DominantSvd, MatchesPowerIterationOracle) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const CMat h = test::random_cmat(rng, 4, 8);
    const DominantVector d = dominant_right_singular_vector(h);
    const CVec oracle = power_iteration(h.adjoint() * h);
    EXPECT_GE(std::abs(oracle.dot(d.v)), 1 - 1e-9);
    EXPECT_NEAR((h * d.v).norm(), d.value, 1e-9 * d.value);
    EXPECT_NEAR(d.v.norm(), 1.0, 1e-10);
    expect_canonical(d.v);
  }
}

TEST(DominantSvd, ZeroMatrixIsDegenerate) {
  EXPECT_THROW(dominant_right_singular_vector(CMat::Zero(2, 4)), DegenerateInputError);
}

TEST(SubbandEigen, IdenticalSlicesReduceToSvd) {
  Rng rng(7);
  const CMat h = test::random_cmat(rng, 2, 8);
  const EigenTarget t = subband_eigenvectors(sample_from({h, h, h, h}), 2);
  ASSERT_EQ(t.v.cols(), 2);
  const CVec ref = dominant_right_singular_vector(h).v;
  for (int c = 0; c < 2; ++c) EXPECT_NEAR(cosine_similarity(ref, t.v.col(c)), 1.0, 1e-12);
}

TEST(SubbandEigen, OneRbPerSubbandMatchesPerRbSvd) {
  Rng rng(8);
  std::vector<CMat> hs;
  for (int i = 0; i < 4; ++i) hs.push_back(test::random_cmat(rng, 2, 8));
  const EigenTarget t = subband_eigenvectors(sample_from(hs), 4);
  for (int c = 0; c < 4; ++c)
    EXPECT_NEAR(cosine_similarity(dominant_right_singular_vector(hs[c]).v, t.v.col(c)), 1.0, 1e-12);
}

TEST(SubbandEigen, ResidualOnSynthesizedWideband) {
  SceneConfig s;
  s.array = ArrayConfig{8, 2, 4, 4, 4};
  s.n_rb = 52;
  s.n_subbands = 13;
  for (int d = 0; d < 10; ++d) {
    const ChannelSample cs = synth_channel(s, d);
    const EigenTarget t = subband_eigenvectors(cs, 13);
    EXPECT_EQ(t.mode, EigenMode::multi_rb);
    for (int sb = 0; sb < 13; ++sb) {
      CMat r = CMat::Zero(32, 32);
      for (int n = 0; n < 4; ++n) r += cs.h[sb * 4 + n].adjoint() * cs.h[sb * 4 + n];
      r /= 4.0;
      const CVec v = t.v.col(sb);
      const double lambda = v.dot(r * v).real();
      EXPECT_LE((r * v - lambda * v).norm(), 1e-9 * lambda);
      EXPECT_NEAR(v.norm(), 1.0, 1e-10);
      expect_canonical(v);
    }
  }
}

TEST(SubbandEigen, DivisibilityViolationIsConfigError) {
  Rng rng(9);
  std::vector<CMat> hs(5, test::random_cmat(rng, 2, 4));
  EXPECT_THROW(subband_eigenvectors(sample_from(hs), 2), ConfigError);
}

TEST(CanonicalPhase, Examples) {
  CVec v(2);
  v << J, 0.0;
  const CVec c = canonical_phase(v);
  EXPECT_NEAR(std::abs(c(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c(1)), 0.0, 1e-15);
  EXPECT_TRUE(canonical_phase(c) == c);
  EXPECT_THROW(canonical_phase(CVec::Zero(3)), DegenerateInputError);
}

TEST(CanonicalPhase, RandomGlobalPhaseIsRemoved) {
  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    const CVec v = test::random_cvec(rng, 8);
    const cd ph = std::exp(J * rng.uniform(0, 2 * std::numbers::pi));
    const CVec a = canonical_phase(v), b = canonical_phase(v * ph);
    EXPECT_LE((a - b).norm(), 1e-12 * v.norm());
    EXPECT_NEAR(a.norm(), v.norm(), 1e-12 * v.norm());
    EXPECT_NEAR(cosine_similarity(v, b), 1.0, 1e-12);
  }
}

TEST(Pse, AnalyticValues) {
  std::vector<cd> one(8, 0.0);
  one[3] = 1.0;
  EXPECT_NEAR(pse(idft_from_bins(one)), 0.0, 1e-12);
  EXPECT_NEAR(pse(idft_from_bins(std::vector<cd>(8, 1.0))), 1.0, 1e-12);
  std::vector<cd> two(8, 0.0);
  two[1] = 1.0;
  two[6] = J;
  EXPECT_NEAR(pse(idft_from_bins(two)), 1.0 / 3.0, 1e-12);
}

TEST(Pse, RangeAndScaleInvariance) {
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    const CVec v = test::random_unit(rng, 16);
    const double p = pse(v);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    const cd c(rng.normal() * 10, rng.normal());
    EXPECT_NEAR(pse(c * v), p, 1e-12);
  }
  EXPECT_THROW(pse(CVec::Zero(4)), DegenerateInputError);
}
