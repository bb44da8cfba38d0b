// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mcenh/error.hpp"
#include "mcenh/features.hpp"
#include "test_util.hpp"

namespace mcenh {
namespace {

constexpr double kPi = std::numbers::pi;

Spectrogram single_bin(const std::vector<Complex>& y) {
  Spectrogram s(1, 1, y.size(), 512, 256);
  for (std::size_t m = 0; m < y.size(); ++m) s(0, 0, m) = y[m];
  return s;
}

TEST(ExtractFeatures, HandComputedTwoChannelBin) {
  const FeatureTensor z = extract_features(single_bin({{1, 0}, {0, 1}}));
  ASSERT_EQ(z.num_rows(), 2u);
  EXPECT_NEAR(z(0, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(z(0, 0, 1), 1.0, 1e-15);
  EXPECT_NEAR(z(1, 0, 0), -kPi / 4, 1e-15);
  EXPECT_NEAR(z(1, 0, 1), kPi / 4, 1e-15);
}

TEST(ExtractFeatures, IdenticalChannelsHaveZeroIpd) {
  const FeatureTensor z = extract_features(single_bin({{0.3, -2}, {0.3, -2}, {0.3, -2}}));
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_NEAR(z(0, 0, m), std::abs(Complex(0.3, -2)), 1e-15);
    EXPECT_EQ(z(1, 0, m), 0.0);
  }
}

TEST(ExtractFeatures, SingleChannel) {
  std::mt19937_64 rng(3);
  const Spectrogram s = stft(testing::gaussian_wave(rng, 1, 2000));
  const FeatureTensor z = extract_features(s);
  for (std::size_t n = 0; n < s.num_frames(); ++n)
    for (std::size_t f = 0; f < s.num_bins(); ++f) {
      EXPECT_EQ(z(f, n, 0), std::abs(s(f, n, 0)));
      EXPECT_EQ(z(s.num_bins() + f, n, 0), 0.0);
    }
}

TEST(ExtractFeatures, IpdRangeIncludesPiExcludesMinusPi) {
  // y = [-1, 1] has mean 0, so use [-1, 1, 1]: mean 1/3 and channel 0 at
  // exactly pi from the mean.
  const FeatureTensor z = extract_features(single_bin({{-1, 0}, {1, 0}, {1, 0}}));
  EXPECT_NEAR(z(1, 0, 0), kPi, 1e-15);
  const FeatureTensor w = extract_features(single_bin({{-1, -0.0}, {1, 0}, {1, 0}}));
  EXPECT_GT(w(1, 0, 0), 0.0);

  std::mt19937_64 rng(4);
  const FeatureTensor r = extract_features(stft(testing::gaussian_wave(rng, 4, 3000)));
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t n = 0; n < r.num_frames(); ++n)
      for (std::size_t k = r.num_bins(); k < r.num_rows(); ++k) {
        EXPECT_GT(r(k, n, m), -kPi);
        EXPECT_LE(r(k, n, m), kPi);
      }
}

TEST(ExtractFeatures, ChannelPermutationEquivariance) {
  std::mt19937_64 rng(5);
  const Spectrogram s = stft(testing::gaussian_wave(rng, 3, 2000));
  const std::vector<std::size_t> perm = {2, 0, 1};
  const FeatureTensor a = extract_features(s).select_channels(perm);
  const FeatureTensor b = extract_features(s.select_channels(perm));
  ASSERT_EQ(a.values().size(), b.values().size());
  for (std::size_t i = 0; i < a.values().size(); ++i)
    EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
}

FeatureTensor two_frame_tensor(double mag0, double mag1, double ipd0, double ipd1) {
  FeatureTensor z(1, 2, 1);
  z(0, 0, 0) = mag0;
  z(0, 1, 0) = mag1;
  z(1, 0, 0) = ipd0;
  z(1, 1, 0) = ipd1;
  return z;
}

TEST(NormalizeFeatures, HandComputedRows) {
  const FeatureTensor z = normalize_features(two_frame_tensor(0, 2, kPi / 4, kPi / 4));
  const double scale = 1.0 / std::sqrt(1.0 + kFeatureVarianceFloor);
  EXPECT_NEAR(z(0, 0, 0), -scale, 1e-15);
  EXPECT_NEAR(z(0, 1, 0), scale, 1e-15);
  EXPECT_EQ(z(1, 0, 0), 0.0);
  EXPECT_EQ(z(1, 1, 0), 0.0);
}

TEST(NormalizeFeatures, ConstantRowBecomesZero) {
  const FeatureTensor z = normalize_features(two_frame_tensor(3, 3, 1, -1));
  EXPECT_EQ(z(0, 0, 0), 0.0);
  EXPECT_EQ(z(0, 1, 0), 0.0);
  EXPECT_NEAR(z(1, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(z(1, 1, 0), -1.0, 1e-15);
}

TEST(NormalizeFeatures, MomentsOfRandomInput) {
  std::mt19937_64 rng(6);
  const FeatureTensor z = normalize_features(extract_features(stft(testing::gaussian_wave(rng, 2, 8000))));
  const double n = static_cast<double>(z.num_frames());
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t k = 1; k < z.num_rows(); k += 13) {
      double mean = 0, var = 0;
      for (std::size_t t = 0; t < z.num_frames(); ++t) mean += z(k, t, m);
      mean /= n;
      for (std::size_t t = 0; t < z.num_frames(); ++t) var += (z(k, t, m) - mean) * (z(k, t, m) - mean);
      var /= n;
      EXPECT_LT(std::abs(mean), 1e-6) << "row " << k;
      if (k < z.num_bins() && k > 0 && k + 1 < z.num_bins()) {
        EXPECT_NEAR(var, 1.0, 1e-3) << "row " << k;
      }
    }
}

TEST(NormalizeFeatures, NeedsTwoFrames) {
  EXPECT_THROW(normalize_features(FeatureTensor(3, 1, 2)), Error);
}

}  // namespace
}  // namespace mcenh
