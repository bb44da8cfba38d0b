// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <cstddef>

namespace mcenh::internal {

// Real <-> half-spectrum FFT. Eigen's kissfft backend caches twiddles per
// instance, so each thread keeps its own plan cache.
class RealFft {
 public:
  static RealFft& local() {
    thread_local RealFft instance;
    return instance;
  }

  // src: nfft real samples, dst: nfft/2 + 1 bins.
  void forward(const double* src, std::complex<double>* dst, std::size_t nfft) {
    fft_.fwd(dst, src, static_cast<Eigen::Index>(nfft));
  }

  // src: nfft/2 + 1 bins, dst: nfft real samples, scaled by 1/nfft.
  void inverse(const std::complex<double>* src, double* dst, std::size_t nfft) {
    fft_.inv(dst, src, static_cast<Eigen::Index>(nfft));
  }

 private:
  RealFft() { fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum); }

  Eigen::FFT<double> fft_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace mcenh::internal
