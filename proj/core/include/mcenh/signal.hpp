// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mcenh {

using Complex = std::complex<double>;

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr std::size_t kDefaultFrameSize = 512;  // 32 ms at 16 kHz
inline constexpr std::size_t kDefaultHop = 256;        // 16 ms at 16 kHz

// Multichannel real signal, channel-major storage.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::size_t num_channels, std::size_t num_samples,
           int sample_rate = kDefaultSampleRate);

  static Waveform from_channels(const std::vector<std::vector<double>>& channels,
                                int sample_rate = kDefaultSampleRate);
  static Waveform mono(std::span<const double> samples,
                       int sample_rate = kDefaultSampleRate);

  std::size_t num_channels() const { return num_channels_; }
  std::size_t num_samples() const { return num_samples_; }
  int sample_rate() const { return sample_rate_; }
  bool empty() const { return num_samples_ == 0 || num_channels_ == 0; }

  std::span<double> channel(std::size_t m);
  std::span<const double> channel(std::size_t m) const;

  double& operator()(std::size_t m, std::size_t t) {
    return data_[m * num_samples_ + t];
  }
  double operator()(std::size_t m, std::size_t t) const {
    return data_[m * num_samples_ + t];
  }

  // Returns a new waveform holding the listed channels in the given order.
  Waveform select_channels(std::span<const std::size_t> channels) const;

  const std::vector<double>& data() const { return data_; }

  // Throws if the sample rate is not positive or any sample is non-finite.
  void validate() const;

 private:
  std::size_t num_channels_ = 0;
  std::size_t num_samples_ = 0;
  int sample_rate_ = kDefaultSampleRate;
  std::vector<double> data_;
};

// Complex one-sided STFT, indexed (bin, frame, channel).
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t num_bins, std::size_t num_frames,
              std::size_t num_channels, std::size_t frame_size,
              std::size_t hop, std::size_t signal_length = 0,
              int sample_rate = kDefaultSampleRate);

  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_channels() const { return num_channels_; }
  std::size_t frame_size() const { return frame_size_; }
  std::size_t hop() const { return hop_; }
  // Length of the analysed signal in samples, 0 when unknown.
  std::size_t signal_length() const { return signal_length_; }
  int sample_rate() const { return sample_rate_; }

  Complex& operator()(std::size_t f, std::size_t n, std::size_t m) {
    return bins_[(m * num_frames_ + n) * num_bins_ + f];
  }
  const Complex& operator()(std::size_t f, std::size_t n, std::size_t m) const {
    return bins_[(m * num_frames_ + n) * num_bins_ + f];
  }

  std::span<Complex> frame(std::size_t m, std::size_t n);
  std::span<const Complex> frame(std::size_t m, std::size_t n) const;

  std::vector<Complex>& bins() { return bins_; }
  const std::vector<Complex>& bins() const { return bins_; }

  Spectrogram select_channels(std::span<const std::size_t> channels) const;

  bool same_shape(const Spectrogram& other) const;

 private:
  std::size_t num_bins_ = 0;
  std::size_t num_frames_ = 0;
  std::size_t num_channels_ = 0;
  std::size_t frame_size_ = 0;
  std::size_t hop_ = 0;
  std::size_t signal_length_ = 0;
  int sample_rate_ = kDefaultSampleRate;
  std::vector<Complex> bins_;
};

// Periodic Hann window of the given length.
std::vector<double> hann_window(std::size_t length);

// Short-time Fourier transform with a periodic Hann window and 50% overlap.
// The signal is zero padded by frame_size/2 on both sides so the first frame
// is centred on sample 0; frames are added until the tail is covered.
Spectrogram stft(const Waveform& x, std::size_t frame_size = kDefaultFrameSize,
                 std::size_t hop = kDefaultHop);

// Weighted overlap-add inverse of stft(). Output is trimmed to the analysed
// length when it is known.
Waveform istft(const Spectrogram& spec);

// Full linear convolution, length a.size() + b.size() - 1 (FFT based).
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace mcenh
