// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcenh/signal.hpp"

namespace mcenh::testing {

inline std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline Waveform gaussian_wave(std::mt19937_64& rng, std::size_t channels, std::size_t n) {
  std::vector<std::vector<double>> ch;
  for (std::size_t m = 0; m < channels; ++m) ch.push_back(gaussian(rng, n));
  return Waveform::from_channels(ch);
}

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXcd a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {dist(rng), dist(rng)};
  return a;
}

inline Eigen::MatrixXcd random_spd(std::mt19937_64& rng, Eigen::Index m) {
  const Eigen::MatrixXcd b = random_complex(rng, m, 2 * m);
  return b * b.adjoint() / static_cast<double>(2 * m);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mcenh_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mcenh::testing
