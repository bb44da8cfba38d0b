// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fft.hpp"
#include "mcenh/error.hpp"

namespace mcenh {

Waveform::Waveform(std::size_t num_channels, std::size_t num_samples,
                   int sample_rate)
    : num_channels_(num_channels),
      num_samples_(num_samples),
      sample_rate_(sample_rate),
      data_(num_channels * num_samples, 0.0) {
  if (sample_rate <= 0) throw Error("sample rate must be positive");
}

Waveform Waveform::from_channels(const std::vector<std::vector<double>>& channels,
                                 int sample_rate) {
  if (channels.empty()) return Waveform(0, 0, sample_rate);
  const std::size_t len = channels.front().size();
  Waveform w(channels.size(), len, sample_rate);
  for (std::size_t m = 0; m < channels.size(); ++m) {
    if (channels[m].size() != len)
      throw Error("all channels of a waveform must have equal length");
    std::copy(channels[m].begin(), channels[m].end(), w.channel(m).begin());
  }
  return w;
}

Waveform Waveform::mono(std::span<const double> samples, int sample_rate) {
  Waveform w(1, samples.size(), sample_rate);
  std::copy(samples.begin(), samples.end(), w.channel(0).begin());
  return w;
}

std::span<double> Waveform::channel(std::size_t m) {
  if (m >= num_channels_) throw Error(fmt::format("channel {} out of range", m));
  return {data_.data() + m * num_samples_, num_samples_};
}

std::span<const double> Waveform::channel(std::size_t m) const {
  if (m >= num_channels_) throw Error(fmt::format("channel {} out of range", m));
  return {data_.data() + m * num_samples_, num_samples_};
}

Waveform Waveform::select_channels(std::span<const std::size_t> channels) const {
  Waveform out(channels.size(), num_samples_, sample_rate_);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    auto src = channel(channels[i]);
    std::copy(src.begin(), src.end(), out.channel(i).begin());
  }
  return out;
}

void Waveform::validate() const {
  if (sample_rate_ <= 0) throw Error("sample rate must be positive");
  if (data_.size() != num_channels_ * num_samples_)
    throw Error("waveform storage does not match its shape");
  for (double v : data_)
    if (!std::isfinite(v)) throw Error("waveform contains non-finite samples");
}

Spectrogram::Spectrogram(std::size_t num_bins, std::size_t num_frames,
                         std::size_t num_channels, std::size_t frame_size,
                         std::size_t hop, std::size_t signal_length,
                         int sample_rate)
    : num_bins_(num_bins),
      num_frames_(num_frames),
      num_channels_(num_channels),
      frame_size_(frame_size),
      hop_(hop),
      signal_length_(signal_length),
      sample_rate_(sample_rate),
      bins_(num_bins * num_frames * num_channels) {}

std::span<Complex> Spectrogram::frame(std::size_t m, std::size_t n) {
  return {bins_.data() + (m * num_frames_ + n) * num_bins_, num_bins_};
}

std::span<const Complex> Spectrogram::frame(std::size_t m, std::size_t n) const {
  return {bins_.data() + (m * num_frames_ + n) * num_bins_, num_bins_};
}

Spectrogram Spectrogram::select_channels(std::span<const std::size_t> channels) const {
  Spectrogram out(num_bins_, num_frames_, channels.size(), frame_size_, hop_,
                  signal_length_, sample_rate_);
  const std::size_t block = num_bins_ * num_frames_;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] >= num_channels_)
      throw Error(fmt::format("channel {} out of range", channels[i]));
    std::copy_n(bins_.begin() + channels[i] * block, block,
                out.bins_.begin() + i * block);
  }
  return out;
}

bool Spectrogram::same_shape(const Spectrogram& other) const {
  return num_bins_ == other.num_bins_ && num_frames_ == other.num_frames_ &&
         num_channels_ == other.num_channels_;
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(length));
  return w;
}

namespace {

void check_framing(std::size_t frame_size, std::size_t hop) {
  if (frame_size < 2 || frame_size % 2 != 0)
    throw Error(fmt::format("frame size must be even and >= 2, got {}", frame_size));
  if (hop != frame_size / 2)
    throw Error(fmt::format("unsupported hop {}: only 50% overlap (hop = {}) is supported",
                            hop, frame_size / 2));
}

}  // namespace

Spectrogram stft(const Waveform& x, std::size_t frame_size, std::size_t hop) {
  check_framing(frame_size, hop);
  if (x.empty()) throw Error("stft of an empty signal");

  const std::size_t length = x.num_samples();
  const std::size_t pad = frame_size / 2;
  const std::size_t num_frames = (length + hop - 1) / hop + 1;
  const std::size_t num_bins = frame_size / 2 + 1;
  const auto window = hann_window(frame_size);

  Spectrogram spec(num_bins, num_frames, x.num_channels(), frame_size, hop,
                   length, x.sample_rate());
  auto& fft = internal::RealFft::local();
  std::vector<double> buf(frame_size);
  for (std::size_t m = 0; m < x.num_channels(); ++m) {
    auto samples = x.channel(m);
    for (std::size_t n = 0; n < num_frames; ++n) {
      // Frame n covers padded positions [n*hop, n*hop + frame_size).
      for (std::size_t i = 0; i < frame_size; ++i) {
        const std::size_t p = n * hop + i;
        const double v = (p >= pad && p - pad < length) ? samples[p - pad] : 0.0;
        buf[i] = v * window[i];
      }
      fft.forward(buf.data(), spec.frame(m, n).data(), frame_size);
    }
  }
  return spec;
}

Waveform istft(const Spectrogram& spec) {
  check_framing(spec.frame_size(), spec.hop());
  const std::size_t frame_size = spec.frame_size();
  const std::size_t hop = spec.hop();
  if (spec.num_bins() != frame_size / 2 + 1)
    throw Error(fmt::format("inconsistent spectrogram: {} bins for frame size {}",
                            spec.num_bins(), frame_size));
  if (spec.bins().size() != spec.num_bins() * spec.num_frames() * spec.num_channels())
    throw Error("inconsistent spectrogram storage");
  if (spec.num_frames() == 0 || spec.num_channels() == 0)
    throw Error("istft of an empty spectrogram");

  const std::size_t pad = frame_size / 2;
  const std::size_t padded = (spec.num_frames() - 1) * hop + frame_size;
  std::size_t length = spec.signal_length();
  if (length == 0) length = (spec.num_frames() - 1) * hop;
  if (length + pad > padded)
    throw Error("spectrogram too short for the recorded signal length");

  const auto window = hann_window(frame_size);
  std::vector<double> envelope(padded, 0.0);
  for (std::size_t n = 0; n < spec.num_frames(); ++n)
    for (std::size_t i = 0; i < frame_size; ++i)
      envelope[n * hop + i] += window[i] * window[i];

  Waveform out(spec.num_channels(), length, spec.sample_rate());
  auto& fft = internal::RealFft::local();
  std::vector<double> acc(padded);
  std::vector<double> buf(frame_size);
  for (std::size_t m = 0; m < spec.num_channels(); ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t n = 0; n < spec.num_frames(); ++n) {
      fft.inverse(spec.frame(m, n).data(), buf.data(), frame_size);
      for (std::size_t i = 0; i < frame_size; ++i)
        acc[n * hop + i] += buf[i] * window[i];
    }
    auto dst = out.channel(m);
    for (std::size_t t = 0; t < length; ++t) {
      const double env = envelope[t + pad];
      dst[t] = env > 1e-12 ? acc[t + pad] / env : 0.0;
    }
  }
  return out;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  // Short kernels are cheaper in the time domain.
  if (std::min(a.size(), b.size()) <= 64) {
    std::vector<double> out(out_len, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  const std::size_t nfft = internal::next_pow2(out_len);
  auto& fft = internal::RealFft::local();
  std::vector<double> pa(nfft, 0.0), pb(nfft, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<Complex> fa(nfft / 2 + 1), fb(nfft / 2 + 1);
  fft.forward(pa.data(), fa.data(), nfft);
  fft.forward(pb.data(), fb.data(), nfft);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa.data(), pa.data(), nfft);
  pa.resize(out_len);
  return pa;
}

}  // namespace mcenh
