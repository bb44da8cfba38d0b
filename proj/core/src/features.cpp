// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/features.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "mcenh/error.hpp"

namespace mcenh {

FeatureTensor::FeatureTensor(std::size_t num_bins, std::size_t num_frames,
                             std::size_t num_channels)
    : num_bins_(num_bins),
      num_frames_(num_frames),
      num_channels_(num_channels),
      values_(2 * num_bins * num_frames * num_channels, 0.0) {}

FeatureTensor FeatureTensor::select_channels(std::span<const std::size_t> channels) const {
  FeatureTensor out(num_bins_, num_frames_, channels.size());
  const std::size_t block = 2 * num_bins_ * num_frames_;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] >= num_channels_)
      throw Error(fmt::format("channel {} out of range", channels[i]));
    std::copy_n(values_.begin() + channels[i] * block, block,
                out.values_.begin() + i * block);
  }
  return out;
}

FeatureTensor extract_features(const Spectrogram& spec) {
  const std::size_t F = spec.num_bins();
  const std::size_t N = spec.num_frames();
  const std::size_t M = spec.num_channels();
  if (M == 0) throw Error("feature extraction needs at least one channel");

  FeatureTensor z(F, N, M);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t f = 0; f < F; ++f) {
      Complex mean = 0.0;
      for (std::size_t m = 0; m < M; ++m) mean += spec(f, n, m);
      mean /= static_cast<double>(M);
      for (std::size_t m = 0; m < M; ++m) {
        const Complex y = spec(f, n, m);
        z(f, n, m) = std::abs(y);
        // angle(y / mean) == angle(y * conj(mean)); avoids dividing by tiny means.
        double ipd = mean == Complex(0.0, 0.0) ? 0.0 : std::arg(y * std::conj(mean));
        if (ipd <= -std::numbers::pi) ipd = std::numbers::pi;
        z(F + f, n, m) = ipd;
      }
    }
  }
  return z;
}

FeatureTensor normalize_features(const FeatureTensor& z, double variance_floor) {
  const std::size_t F = z.num_bins();
  const std::size_t N = z.num_frames();
  const std::size_t M = z.num_channels();
  if (N < 2)
    throw Error(fmt::format("feature normalisation needs at least 2 frames, got {}", N));

  FeatureTensor out = z;
  const double inv_n = 1.0 / static_cast<double>(N);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < 2 * F; ++k) {
      double mean = 0.0;
      for (std::size_t n = 0; n < N; ++n) mean += z(k, n, m);
      mean *= inv_n;
      if (k < F) {
        double var = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
          const double d = z(k, n, m) - mean;
          var += d * d;
        }
        const double scale = 1.0 / std::sqrt(var * inv_n + variance_floor);
        for (std::size_t n = 0; n < N; ++n) out(k, n, m) = (z(k, n, m) - mean) * scale;
      } else {
        for (std::size_t n = 0; n < N; ++n) out(k, n, m) = z(k, n, m) - mean;
      }
    }
  }
  return out;
}

}  // namespace mcenh
