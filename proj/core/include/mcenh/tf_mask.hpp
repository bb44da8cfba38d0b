// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <vector>

namespace mcenh {

// Real time-frequency mask, F bins by N frames, entries in [0, 1].
class TFMask {
 public:
  TFMask() = default;
  TFMask(std::size_t num_bins, std::size_t num_frames, double fill = 0.0)
      : num_bins_(num_bins), num_frames_(num_frames), values_(num_bins * num_frames, fill) {}

  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_frames() const { return num_frames_; }

  double& operator()(std::size_t f, std::size_t n) { return values_[n * num_bins_ + f]; }
  double operator()(std::size_t f, std::size_t n) const { return values_[n * num_bins_ + f]; }

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t num_bins_ = 0;
  std::size_t num_frames_ = 0;
  std::vector<double> values_;
};

}  // namespace mcenh
