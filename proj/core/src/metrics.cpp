// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/metrics.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mcenh/error.hpp"

namespace mcenh {
namespace {

// Cross-correlation c[k] = sum_t a[t] b[t + k] for k in [0, max_lag).
std::vector<double> correlate(std::span<const double> a, std::span<const double> b,
                              std::size_t max_lag) {
  std::vector<double> out(max_lag, 0.0);
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < max_lag && k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += a[t] * b[t + k];
    out[k] = acc;
  }
  return out;
}

const Waveform& mono_or_throw(const Waveform& w, const char* what) {
  if (w.num_channels() != 1) throw Error(fmt::format("{} must be single-channel", what));
  return w;
}

}  // namespace

double CISDRConfig::alpha() const { return std::pow(10.0, -sdr_max_db / 10.0); }

double energy(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

std::vector<double> filter_truncated(std::span<const double> h, std::span<const double> s) {
  std::vector<double> y = convolve(h, s);
  y.resize(s.size());
  return y;
}

std::vector<double> ls_filter_estimate(std::span<const double> s, std::span<const double> d,
                                       std::size_t filter_len) {
  const std::size_t T = s.size();
  const std::size_t L = filter_len;
  if (L == 0) throw Error("filter length must be positive");
  if (d.size() != T)
    throw Error(fmt::format("reference has {} samples, estimate {}", T, d.size()));
  if (T < L) throw Error(fmt::format("signal length {} shorter than filter length {}", T, L));
  if (energy(s) == 0.0) throw Error("reference signal is identically zero");

  // Gram matrix of the truncated shifts: R(i, j) = sum_{t=max(i,j)}^{T-1}
  // s[t-i] s[t-j]. Along each diagonal it drops one tail product per step.
  const std::vector<double> r0 = correlate(s, s, L);
  Eigen::MatrixXd gram(L, L);
  for (std::size_t k = 0; k < L; ++k) {
    double v = r0[k];
    gram(0, k) = v;
    for (std::size_t i = 1; i + k < L; ++i) {
      const std::size_t j = i + k;
      // R(i, j) = R(i-1, j-1) - s[T-j] s[T-j+k]
      v -= s[T - j] * s[T - j + k];
      gram(i, j) = v;
    }
  }
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();

  // p[i] = sum_t s[t-i] d[t]
  const std::vector<double> p = correlate(s, d, L);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(L));

  const double ridge = kLsFilterRidge * gram.diagonal().mean();
  gram.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  Eigen::VectorXd h;
  if (llt.info() == Eigen::Success) {
    h = llt.solve(rhs);
  } else {
    h = gram.ldlt().solve(rhs);
  }
  return {h.data(), h.data() + h.size()};
}

double ci_sdr(std::span<const double> s, std::span<const double> d, const CISDRConfig& cfg) {
  if (s.size() != d.size())
    throw Error(fmt::format("CI-SDR: reference has {} samples, estimate {}", s.size(), d.size()));
  const auto h = ls_filter_estimate(s, d, cfg.filter_len);
  const auto target = filter_truncated(h, s);
  double target_energy = 0.0, residual = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    target_energy += target[t] * target[t];
    const double e = target[t] - d[t];
    residual += e * e;
  }
  return 10.0 * std::log10(target_energy / (residual + cfg.alpha() * target_energy));
}

double ci_sdr(const Waveform& s, const Waveform& d, const CISDRConfig& cfg) {
  return ci_sdr(mono_or_throw(s, "CI-SDR reference").channel(0),
                mono_or_throw(d, "CI-SDR estimate").channel(0), cfg);
}

double snr_db(std::span<const double> signal, std::span<const double> noise) {
  if (signal.size() != noise.size())
    throw Error(fmt::format("SNR: signal has {} samples, noise {}", signal.size(), noise.size()));
  const double noise_energy = energy(noise);
  if (!(noise_energy > 0.0)) throw Error("SNR: noise energy is zero");
  return 10.0 * std::log10(energy(signal) / noise_energy);
}

double snr_db(const Waveform& signal, const Waveform& noise) {
  if (signal.num_channels() != noise.num_channels() || signal.num_samples() != noise.num_samples())
    throw Error("SNR: signal and noise shapes differ");
  return snr_db(std::span<const double>(signal.data()), std::span<const double>(noise.data()));
}

}  // namespace mcenh
