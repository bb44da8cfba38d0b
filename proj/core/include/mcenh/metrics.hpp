// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcenh/signal.hpp"

namespace mcenh {

struct CISDRConfig {
  std::size_t filter_len = 512;  // 32 ms at 16 kHz
  // Soft threshold alpha = 10^(-sdr_max_db / 10). The default caps the score at
  // +30 dB.
  double sdr_max_db = 30.0;

  double alpha() const;
};

inline constexpr double kLsFilterRidge = 1e-9;

// Least-squares FIR h (length L) minimising || (h * s)[0, T) - d ||, via the
// normal equations of the truncated convolution with a small ridge of
// 1e-9 * mean(diag) for conditioning.
std::vector<double> ls_filter_estimate(std::span<const double> s, std::span<const double> d,
                                       std::size_t filter_len);

// (h * s) truncated to s.size() samples.
std::vector<double> filter_truncated(std::span<const double> h, std::span<const double> s);

// Convolution-invariant SDR in dB (higher is better).
double ci_sdr(std::span<const double> s, std::span<const double> d,
              const CISDRConfig& cfg = {});
double ci_sdr(const Waveform& s, const Waveform& d, const CISDRConfig& cfg = {});

double snr_db(std::span<const double> signal, std::span<const double> noise);
double snr_db(const Waveform& signal, const Waveform& noise);

double energy(std::span<const double> x);

}  // namespace mcenh
