// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>

#include "csifb/channel_synth.hpp"
#include "csifb/eigen_target.hpp"
#include "csifb/errors.hpp"
#include "csifb/harness/dataset.hpp"
#include "test_util.hpp"

using namespace csifb;

namespace {

SceneConfig scene(int n1, int n2, int nr, int n_rb, int ns) {
  SceneConfig s;
  s.array = ArrayConfig{n1, n2, 4, 4, nr};
  s.n_rb = n_rb;
  s.n_subbands = ns;
  s.seed = 99;
  return s;
}

double rb_corr(const CMat& a, const CMat& b) {
  return std::abs((a.adjoint() * b).trace()) / (a.norm() * b.norm());
}

}  // namespace

TEST(SynthChannel, ShapeFinitenessAndNonzeroSlices) {
  const SceneConfig s = scene(8, 2, 4, 52, 13);
  const ChannelSample c = synth_channel(s, 3);
  ASSERT_EQ(c.n_rb(), 52);
  for (const CMat& h : c.h) {
    ASSERT_EQ(h.rows(), 4);
    ASSERT_EQ(h.cols(), 32);
    EXPECT_TRUE(h.allFinite());
    EXPECT_GT(h.norm(), 0.0);
  }
  EXPECT_EQ(c.seed_used, drop_seed(s.seed, 3));
}

TEST(SynthChannel, SinglePathWithoutSpreadIsRankOne) {
  SceneConfig s = scene(2, 2, 2, 4, 1);
  s.n_paths = 1;
  s.angle_spread = 0.0;
  for (int d = 0; d < 20; ++d) {
    for (const CMat& h : synth_channel(s, d).h) {
      Eigen::JacobiSVD<CMat> svd(h);
      const auto sv = svd.singularValues();
      EXPECT_LE(sv(1), 1e-10 * sv(0));
    }
  }
}

TEST(SynthChannel, DeterministicPerDrop) {
  const SceneConfig s = scene(2, 2, 2, 8, 2);
  const ChannelSample a = synth_channel(s, 11), b = synth_channel(s, 11), c = synth_channel(s, 12);
  for (int n = 0; n < a.n_rb(); ++n) EXPECT_TRUE(a.h[n] == b.h[n]);
  EXPECT_FALSE(a.h[0] == c.h[0]);
}

TEST(SynthChannel, UnitMeanPowerPerSample) {
  const SceneConfig s = scene(8, 2, 4, 52, 13);
  double total = 0;
  long long entries = 0;
  for (int d = 0; d < 50; ++d) {
    const ChannelSample c = synth_channel(s, d);
    double p = 0;
    for (const CMat& h : c.h) p += h.squaredNorm();
    const long long n = 52LL * 4 * 32;
    EXPECT_NEAR(p / static_cast<double>(n), 1.0, 1e-10);
    total += p;
    entries += n;
  }
  const double mean = total / static_cast<double>(entries);
  EXPECT_GE(mean, 0.9);
  EXPECT_LE(mean, 1.1);
}

TEST(SynthChannel, FrequencyCorrelationDecaysWithRbDistance) {
  const SceneConfig s = scene(2, 2, 2, 52, 13);
  double adj = 0, far = 0;
  const int drops = 1000;
  for (int d = 0; d < drops; ++d) {
    const ChannelSample c = synth_channel(s, d);
    adj += rb_corr(c.h[0], c.h[1]);
    far += rb_corr(c.h[0], c.h[51]);
  }
  EXPECT_GT(adj / drops, far / drops);
}

TEST(SynthChannel, LargerArraysGiveSparserEigenvectors) {
  double mean_pse[2] = {0, 0};
  const int sizes[2][2] = {{4, 2}, {8, 4}};  // nt = 16, 64
  for (int k = 0; k < 2; ++k) {
    const SceneConfig s = scene(sizes[k][0], sizes[k][1], 2, 1, 1);
    for (int d = 0; d < 200; ++d) mean_pse[k] += pse(single_rb_target(synth_channel(s, d)).v.col(0));
    mean_pse[k] /= 200;
  }
  EXPECT_LT(mean_pse[1], mean_pse[0]);
}

TEST(SceneConfig, ValidationErrors) {
  SceneConfig s = scene(2, 2, 2, 52, 13);
  s.n_subbands = 5;
  EXPECT_THROW(s.validate(), ConfigError);
  s = scene(2, 2, 2, 4, 1);
  s.n_paths = 0;
  EXPECT_THROW(synth_channel(s, 0), ConfigError);
  s = scene(2, 2, 2, 4, 1);
  s.delay_spread = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(SceneConfig, DigestTracksContent) {
  SceneConfig a = scene(2, 2, 2, 4, 1), b = a;
  EXPECT_EQ(a.digest(), b.digest());
  b.seed = 100;
  EXPECT_NE(a.digest(), b.digest());
}

TEST(SynthDataset, SplitCounts) {
  const SplitCounts c = split_counts(10, SplitFractions{});
  EXPECT_EQ(c.train, 8u);
  EXPECT_EQ(c.val, 1u);
  EXPECT_EQ(c.test, 1u);
  const SplitCounts one = split_counts(1, SplitFractions{});
  EXPECT_EQ(one.train, 1u);
  EXPECT_EQ(one.val + one.test, 0u);
  const SplitCounts k = split_counts(1000, SplitFractions{});
  EXPECT_EQ(k.train, 800u);
  EXPECT_EQ(k.val, 100u);
  EXPECT_EQ(k.test, 100u);
  EXPECT_THROW(split_counts(10, SplitFractions{0.5, 0.1, 0.1}), ConfigError);
}

TEST(SynthDataset, RegenerationIsByteIdentical) {
  const SceneConfig s = scene(2, 2, 2, 4, 2);
  const auto d1 = test::scratch_dir("synth_a"), d2 = test::scratch_dir("synth_b");
  const DatasetFiles a = synth_dataset(s, 10, SplitFractions{}, d1, true);
  const DatasetFiles b = synth_dataset(s, 10, SplitFractions{}, d2, true);
  for (auto [x, y] : {std::pair{a.train, b.train}, {a.val, b.val}, {a.test, b.test},
                      {a.train_channel, b.train_channel}}) {
    EXPECT_EQ(file_digest(x), file_digest(y));
  }
  EXPECT_EQ(read_dataset_header(a.train).sample_count, 8u);
  EXPECT_EQ(read_dataset_header(a.val).sample_count, 1u);
  EXPECT_EQ(read_dataset_header(a.test).sample_count, 1u);
  EXPECT_EQ(read_dataset_header(a.train_channel).kind, DatasetKind::channel);
  EXPECT_EQ(read_dataset_header(a.train_channel).ns, 4u);
  EXPECT_EQ(read_dataset_header(a.train).kind, DatasetKind::eigen_multi);
}

TEST(SynthDataset, ChannelFileMatchesEigenFile) {
  const SceneConfig s = scene(2, 2, 2, 4, 2);
  const auto dir = test::scratch_dir("synth_pair");
  const DatasetFiles f = synth_dataset(s, 10, SplitFractions{}, dir, true);
  const Dataset ch = read_dataset(f.train_channel), eig = read_dataset(f.train);
  ASSERT_EQ(ch.samples.size(), eig.samples.size());
  for (std::size_t i = 0; i < ch.samples.size(); ++i) {
    ChannelSample cs;
    for (int n = 0; n < 4; ++n) cs.h.push_back(ch.samples[i].middleCols(n * 8, 8));
    const CMat v = subband_eigenvectors(cs, 2).v;
    for (int c = 0; c < 2; ++c) EXPECT_GT(std::abs(v.col(c).dot(eig.samples[i].col(c))), 1 - 1e-5);
  }
}

TEST(SynthDataset, EmptyDatasetHasValidHeaders) {
  const SceneConfig s = scene(2, 2, 2, 1, 1);
  const auto dir = test::scratch_dir("synth_empty");
  const DatasetFiles f = synth_dataset(s, 0, SplitFractions{}, dir, false);
  for (const auto& p : {f.train, f.val, f.test}) {
    const DatasetHeader h = read_dataset_header(p);
    EXPECT_EQ(h.sample_count, 0u);
    EXPECT_EQ(h.kind, DatasetKind::eigen_single);
    EXPECT_EQ(std::filesystem::file_size(p), DatasetHeader::kBytes);
  }
}
