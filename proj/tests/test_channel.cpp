// Copyright 2026 The irsaj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace irsaj;

namespace {

ChannelSet scalar_channels(Complex g, Complex bu, Complex ru) {
  ChannelSet ch;
  ch.g_bs_irs = CMatrix::Constant(1, 1, g);
  ch.g_bs_ue = {CVector::Constant(1, bu)};
  ch.g_irs_ue = {CVector::Constant(1, ru)};
  ch.g_jam_ue = {CVector::Constant(1, 1.0)};
  return ch;
}

}  // namespace

TEST(Pathloss, OneMetreWithPl0Of30dB) {
  PathlossConfig cfg;
  EXPECT_DOUBLE_EQ(pathloss_gain(1.0, 2.2, cfg), 1e-3);
}

TEST(Pathloss, ReferenceDistanceIgnoresExponent) {
  PathlossConfig cfg;
  cfg.d0 = 7.5;
  for (double beta : {0.5, 2.2, 3.75, 6.0}) EXPECT_DOUBLE_EQ(pathloss_gain(7.5, beta, cfg), std::pow(10.0, -3.0));
}

TEST(Pathloss, HandEvaluatedAtTenMetres) {
  PathlossConfig cfg;
  // 30 dB + 10 * 2 * log10(10) = 50 dB
  EXPECT_NEAR(pathloss_gain(10.0, 2.0, cfg), 1e-5, 1e-20);
}

TEST(Pathloss, RejectsNonPositiveDistance) {
  PathlossConfig cfg;
  EXPECT_THROW(pathloss_gain(0.0, 2.0, cfg), std::domain_error);
  EXPECT_THROW(pathloss_gain(-1.0, 2.0, cfg), std::domain_error);
}

TEST(Pathloss, StrictlyDecreasingInDistance) {
  PathlossConfig cfg;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> d(0.1, 500.0), b(0.1, 5.0);
  for (int i = 0; i < 1000; ++i) {
    double d1 = d(gen), d2 = d(gen);
    if (d1 == d2) continue;
    if (d1 > d2) std::swap(d1, d2);
    const double beta = b(gen);
    EXPECT_GT(pathloss_gain(d1, beta, cfg), pathloss_gain(d2, beta, cfg));
  }
}

TEST(Fading, DeterministicUnderSeed) {
  Rng a = make_rng(42, Stream::channels);
  Rng b = make_rng(42, Stream::channels);
  EXPECT_EQ(sample_fading(2, 2, a), sample_fading(2, 2, b));
}

TEST(Fading, RejectsEmptyShape) {
  Rng rng = make_rng(1, Stream::channels);
  EXPECT_THROW(sample_fading(0, 2, rng), std::domain_error);
  EXPECT_THROW(sample_fading(2, 0, rng), std::domain_error);
}

TEST(Fading, FirstAndSecondMoments) {
  Rng rng = make_rng(7, Stream::channels);
  const CMatrix x = sample_fading(1000, 100, rng);
  const Complex mean = x.mean();
  double var = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) var += std::norm(x(i) - mean);
  var /= static_cast<double>(x.size() - 1);
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Fading, CircularSymmetry) {
  Rng rng = make_rng(8, Stream::channels);
  const CMatrix x = sample_fading(100000, 1, rng);
  double re2 = 0.0, im2 = 0.0, cross = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    re2 += x(i).real() * x(i).real();
    im2 += x(i).imag() * x(i).imag();
    cross += x(i).real() * x(i).imag();
  }
  const double n = static_cast<double>(x.size());
  EXPECT_NEAR(re2 / n, 0.5, 0.01);
  EXPECT_NEAR(im2 / n, 0.5, 0.01);
  EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(GenerateChannels, OnesFadingIsolatesPathloss) {
  Geometry geom;
  geom.bs = {0.0, 0.0};
  geom.irs = {50.0, 50.0};
  geom.jammer = {5.0, 5.0};
  geom.ues = {{1.0, 0.0}};
  PathlossConfig cfg;
  ChannelDims dims{3, 2, 2};
  const auto ones = [](Eigen::Index r, Eigen::Index c) { return CMatrix::Ones(r, c); };
  const ChannelSet ch = generate_channels(geom, cfg, dims, ones);
  for (Eigen::Index n = 0; n < 3; ++n) EXPECT_NEAR(std::abs(ch.g_bs_ue[0](n)), std::sqrt(1e-3), 1e-15);
  for (Eigen::Index n = 0; n < 3; ++n) EXPECT_DOUBLE_EQ(ch.g_bs_ue[0](n).imag(), 0.0);
  const double ru = std::sqrt(pathloss_gain(distance(geom.irs, geom.ues[0]), cfg.beta_ru, cfg));
  EXPECT_NEAR(ch.g_irs_ue[0](0).real(), ru, 1e-18);
}

TEST(GenerateChannels, Shapes) {
  Geometry geom;
  Rng geo = make_rng(1, Stream::geometry);
  geom = place_ues(geom, 4, geo);
  Rng rng = make_rng(1, Stream::channels);
  const ChannelSet ch = generate_channels(geom, PathlossConfig{}, ChannelDims{8, 60, 8}, rng);
  EXPECT_EQ(ch.g_bs_irs.rows(), 60);
  EXPECT_EQ(ch.g_bs_irs.cols(), 8);
  ASSERT_EQ(ch.n_ues(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(ch.g_irs_ue[k].size(), 60);
    EXPECT_EQ(ch.g_bs_ue[k].size(), 8);
    EXPECT_EQ(ch.g_jam_ue[k].size(), 8);
  }
  EXPECT_TRUE(ch.consistent());
  EXPECT_TRUE(ch.all_finite());
}

TEST(GenerateChannels, AveragePowerMatchesPathloss) {
  Geometry geom;
  geom.ues = {{150.0, 50.0}};
  PathlossConfig cfg;
  const double expected = pathloss_gain(distance(geom.bs, geom.ues[0]), cfg.beta_bu, cfg);
  for (std::uint64_t seed : {11u, 12u}) {
    Rng rng = make_rng(seed, Stream::channels);
    double acc = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 5000; ++rep) {
      const ChannelSet ch = generate_channels(geom, cfg, ChannelDims{8, 2, 1}, rng);
      for (Eigen::Index n = 0; n < 8; ++n, ++count) acc += std::norm(ch.g_bs_ue[0](n));
    }
    EXPECT_NEAR(acc / static_cast<double>(count) / expected, 1.0, 0.03) << "seed " << seed;
  }
}

TEST(GenerateChannels, DifferentSeedsDifferentFading) {
  Geometry geom;
  geom.ues = {{150.0, 50.0}};
  Rng a = make_rng(1, Stream::channels), b = make_rng(2, Stream::channels);
  const auto ca = generate_channels(geom, PathlossConfig{}, ChannelDims{}, a);
  const auto cb = generate_channels(geom, PathlossConfig{}, ChannelDims{}, b);
  EXPECT_NE(ca.g_bs_irs, cb.g_bs_irs);
}

TEST(Geometry, PlacementInsideRegionAndValid) {
  Geometry geom;
  Rng rng = make_rng(5, Stream::geometry);
  const Geometry g = place_ues(geom, 50, rng);
  ASSERT_EQ(g.n_ues(), 50u);
  for (const Point& p : g.ues) EXPECT_TRUE(g.ue_region.contains(p));
  EXPECT_NO_THROW(g.validate());
}

TEST(Geometry, CoincidentNodesRejected) {
  Geometry g;
  g.ues = {g.jammer};
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(EffectiveChannel, ScalarConstructive) {
  const ChannelSet ch = scalar_channels(1.0, 1.0, 1.0);
  const CRowVector h = effective_channel(0, PhaseShiftMatrix(std::vector<double>{0.0}), ch);
  EXPECT_NEAR(std::abs(h(0) - Complex(2.0, 0.0)), 0.0, 1e-15);
}

TEST(EffectiveChannel, ScalarDestructive) {
  const ChannelSet ch = scalar_channels(1.0, 1.0, 1.0);
  const CRowVector h = effective_channel(0, PhaseShiftMatrix(std::vector<double>{std::numbers::pi}), ch);
  EXPECT_NEAR(std::abs(h(0)), 0.0, 1e-15);
}

TEST(EffectiveChannel, MatchesTripleLoop) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ChannelSet ch = oracle::random_channels(2, 2, 2, 2, seed);
    const auto thetas = oracle::random_thetas(2, seed + 100);
    for (std::size_t k = 0; k < 2; ++k) {
      const CRowVector h = effective_channel(k, PhaseShiftMatrix(thetas), ch);
      const auto ref = oracle::effective_channel(k, thetas, ch);
      for (std::size_t n = 0; n < 2; ++n) EXPECT_NEAR(std::abs(h(static_cast<Eigen::Index>(n)) - ref[n]), 0.0, 1e-12);
    }
  }
}

TEST(EffectiveChannel, LinearInGAndDirectLink) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ChannelSet a = oracle::random_channels(2, 3, 4, 2, seed);
    const ChannelSet b = oracle::random_channels(2, 3, 4, 2, seed + 50);
    const PhaseShiftMatrix phi(oracle::random_thetas(4, seed + 7));
    const Complex c1(0.7, -1.3), c2(-0.4, 2.1);
    ChannelSet mix = a;
    mix.g_bs_irs = c1 * a.g_bs_irs + c2 * b.g_bs_irs;
    ChannelSet a_only = a, b_only = a;
    b_only.g_bs_irs = b.g_bs_irs;
    // Zero the direct link so the G-part alone is linear.
    for (auto* set : {&mix, &a_only, &b_only})
      for (auto& v : set->g_bs_ue) v.setZero();
    const CRowVector lhs = effective_channel(0, phi, mix);
    const CRowVector rhs = c1 * effective_channel(0, phi, a_only) + c2 * effective_channel(0, phi, b_only);
    EXPECT_LT((lhs - rhs).norm(), 1e-12);

    // Superposition in g_bu.
    ChannelSet d1 = a, d2 = a, d12 = a;
    d1.g_bs_irs.setZero();
    d2.g_bs_irs.setZero();
    d12.g_bs_irs.setZero();
    d2.g_bs_ue[1] = b.g_bs_ue[1];
    d12.g_bs_ue[1] = a.g_bs_ue[1] + b.g_bs_ue[1];
    EXPECT_LT((effective_channel(1, phi, d12) - effective_channel(1, phi, d1) - effective_channel(1, phi, d2)).norm(),
              1e-12);
  }
}

TEST(EffectiveChannel, IndexAndShapeChecks) {
  const ChannelSet ch = oracle::random_channels(2, 2, 3, 2, 1);
  EXPECT_THROW(effective_channel(2, PhaseShiftMatrix(3), ch), std::out_of_range);
  EXPECT_THROW(effective_channel(0, PhaseShiftMatrix(2), ch), std::invalid_argument);
}

TEST(PhaseShift, UnitModulusAfterConstructionAndMutation) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> ud(0.0, kTwoPi);
  PhaseShiftMatrix phi(oracle::random_thetas(64, 4));
  for (int i = 0; i < 1000; ++i) phi.set_theta(static_cast<std::size_t>(i % 64), ud(gen));
  for (std::size_t m = 0; m < phi.size(); ++m) {
    EXPECT_NEAR(std::abs(phi.coefficient(m)), 1.0, 1e-12);
    EXPECT_EQ(phi.amplitude(m), 1.0);
  }
}

TEST(PhaseShift, RejectsOutOfRangeAngles) {
  EXPECT_THROW(PhaseShiftMatrix(std::vector<double>{-0.1}), std::domain_error);
  EXPECT_THROW(PhaseShiftMatrix(std::vector<double>{kTwoPi + 1e-9}), std::domain_error);
  PhaseShiftMatrix phi(2);
  EXPECT_THROW(phi.set_theta(0, 7.0), std::domain_error);
  EXPECT_NO_THROW(phi.set_theta(1, kTwoPi));
}

TEST(EffectiveChannel, CoPhasingDominatesRandomProfiles) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ChannelSet ch = oracle::random_channels(1, 1, 16, 1, seed);
    ch.g_bs_ue[0].setZero();
    // Reflected term m is conj(g_ru[m]) e^{j theta_m} G[m]; align all of them at phase 0.
    std::vector<double> aligned(16);
    for (Eigen::Index m = 0; m < 16; ++m) {
      double t = -std::arg(std::conj(ch.g_irs_ue[0](m)) * ch.g_bs_irs(m, 0));
      if (t < 0.0) t += kTwoPi;
      aligned[static_cast<std::size_t>(m)] = t;
    }
    const double best = std::norm(effective_channel(0, PhaseShiftMatrix(aligned), ch)(0));
    for (int draw = 0; draw < 1000; ++draw) {
      const auto thetas = oracle::random_thetas(16, seed * 1000 + static_cast<std::uint64_t>(draw));
      EXPECT_GE(best, std::norm(effective_channel(0, PhaseShiftMatrix(thetas), ch)(0)));
    }
  }
}
