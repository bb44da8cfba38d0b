// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcenh/signal.hpp"

namespace mcenh {

// Mask-estimator input: for every channel m and frame n a column of 2F reals,
// rows [0, F) hold magnitudes and rows [F, 2F) hold phase differences to the
// channel-averaged spectrum.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(std::size_t num_bins, std::size_t num_frames, std::size_t num_channels);

  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_rows() const { return 2 * num_bins_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_channels() const { return num_channels_; }

  double& operator()(std::size_t k, std::size_t n, std::size_t m) {
    return values_[(m * num_frames_ + n) * 2 * num_bins_ + k];
  }
  double operator()(std::size_t k, std::size_t n, std::size_t m) const {
    return values_[(m * num_frames_ + n) * 2 * num_bins_ + k];
  }

  // Contiguous 2F column for (frame n, channel m).
  std::span<const double> column(std::size_t n, std::size_t m) const {
    return {values_.data() + (m * num_frames_ + n) * 2 * num_bins_, 2 * num_bins_};
  }

  FeatureTensor select_channels(std::span<const std::size_t> channels) const;

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t num_bins_ = 0;
  std::size_t num_frames_ = 0;
  std::size_t num_channels_ = 0;
  std::vector<double> values_;
};

inline constexpr double kFeatureVarianceFloor = 1e-8;

// Magnitude and IPD features. IPD is 0 where the channel mean vanishes.
FeatureTensor extract_features(const Spectrogram& spec);

// Per (row, channel) statistics over frames: magnitude rows are mean and
// variance normalised, IPD rows only mean normalised. Needs >= 2 frames.
FeatureTensor normalize_features(const FeatureTensor& z,
                                 double variance_floor = kFeatureVarianceFloor);

}  // namespace mcenh
