// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/beamform.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace mcenh {

TFMask oracle_mask(const Spectrogram& desired, const Spectrogram& mixture,
                   std::size_t mixture_channel) {
  if (desired.num_bins() != mixture.num_bins() || desired.num_frames() != mixture.num_frames())
    throw Error(fmt::format("oracle mask: desired {}x{} and mixture {}x{} differ in shape",
                            desired.num_bins(), desired.num_frames(), mixture.num_bins(),
                            mixture.num_frames()));
  if (mixture_channel >= mixture.num_channels())
    throw Error(fmt::format("oracle mask: channel {} out of range", mixture_channel));
  const std::size_t desired_channel = desired.num_channels() == 1 ? 0 : mixture_channel;
  if (desired_channel >= desired.num_channels())
    throw Error("oracle mask: desired image lacks the requested channel");

  TFMask mask(mixture.num_bins(), mixture.num_frames());
  for (std::size_t n = 0; n < mixture.num_frames(); ++n) {
    for (std::size_t f = 0; f < mixture.num_bins(); ++f) {
      const Complex d = desired(f, n, desired_channel);
      const Complex y = mixture(f, n, mixture_channel);
      const double speech = std::norm(d);
      const double rest = std::norm(y - d);
      mask(f, n) = std::clamp(speech / (speech + rest + kOracleMaskEps), 0.0, 1.0);
    }
  }
  return mask;
}

CovariancePair estimate_covariances(const Spectrogram& y, const TFMask& mask) {
  const std::size_t F = y.num_bins();
  const std::size_t N = y.num_frames();
  const auto M = static_cast<Eigen::Index>(y.num_channels());
  if (mask.num_bins() != F || mask.num_frames() != N)
    throw Error(fmt::format("covariance estimation: mask {}x{} does not match spectrogram {}x{}",
                            mask.num_bins(), mask.num_frames(), F, N));
  if (M == 0) throw Error("covariance estimation needs at least one channel");
  const double delta = 1e-6 * static_cast<double>(N);

  CovariancePair cov;
  cov.phi_dd.reserve(F);
  cov.phi_uu.reserve(F);
  CVector v(M);
  for (std::size_t f = 0; f < F; ++f) {
    CMatrix dd = CMatrix::Zero(M, M);
    CMatrix uu = CMatrix::Zero(M, M);
    double sum_d = 0.0, sum_u = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double g = mask(f, n);
      for (Eigen::Index m = 0; m < M; ++m) v(m) = y(f, n, static_cast<std::size_t>(m));
      const CMatrix outer = v * v.adjoint();
      dd += g * outer;
      uu += (1.0 - g) * outer;
      sum_d += g;
      sum_u += 1.0 - g;
    }
    if (sum_d <= delta)
      throw DegenerateMaskError(
          f, fmt::format("degenerate mask in subband {}: desired weight {} <= {}", f, sum_d, delta));
    if (sum_u <= delta)
      throw DegenerateMaskError(
          f, fmt::format("degenerate mask in subband {}: undesired weight {} <= {}", f, sum_u, delta));
    dd /= sum_d;
    uu /= sum_u;
    cov.phi_dd.push_back(0.5 * (dd + dd.adjoint()));
    cov.phi_uu.push_back(0.5 * (uu + uu.adjoint()));
  }
  return cov;
}

CMatrix regularize(const CMatrix& phi) {
  const double load = phi.trace().real() * kMvdrRegularization;
  CMatrix out = phi;
  out.diagonal().array() += load;
  return out;
}

CMatrix mvdr_solve(const CMatrix& phi_uu, const CMatrix& phi_dd) {
  const CMatrix loaded = regularize(phi_uu);
  Eigen::LLT<CMatrix> llt(loaded);
  if (llt.info() != Eigen::Success || !(loaded.trace().real() > 0.0))
    throw Error("MVDR: noise covariance is not positive definite after regularisation");
  return llt.solve(phi_dd);
}

namespace {

// phi_uu^-1 phi_dd / trace(phi_uu^-1 phi_dd) for one subband.
CMatrix normalized_filter(const CMatrix& phi_uu, const CMatrix& phi_dd, std::size_t subband) {
  const CMatrix x = mvdr_solve(phi_uu, phi_dd);
  const Complex tr = x.trace();
  if (!(std::abs(tr) >= kMinMvdrTrace))
    throw Error(fmt::format("MVDR: no desired signal in subband {} (|trace| = {})", subband,
                            std::abs(tr)));
  return x / tr;
}

void check_cov(const CovariancePair& cov) {
  if (cov.phi_dd.size() != cov.phi_uu.size())
    throw Error("covariance pair has mismatched subband counts");
  if (cov.phi_dd.empty()) throw Error("covariance pair has no subbands");
}

}  // namespace

CVector mvdr_vector(const CMatrix& phi_uu, const CMatrix& phi_dd, std::size_t reference) {
  if (reference >= static_cast<std::size_t>(phi_dd.cols()))
    throw Error(fmt::format("MVDR: reference {} out of range", reference));
  return normalized_filter(phi_uu, phi_dd, 0).col(static_cast<Eigen::Index>(reference));
}

BeamWeights mvdr_weights(const CovariancePair& cov, std::size_t reference) {
  check_cov(cov);
  if (reference >= cov.num_channels())
    throw Error(fmt::format("MVDR: reference {} out of range for {} channels", reference,
                            cov.num_channels()));
  BeamWeights out;
  out.reference = reference;
  out.w.reserve(cov.num_bins());
  for (std::size_t f = 0; f < cov.num_bins(); ++f)
    out.w.push_back(
        normalized_filter(cov.phi_uu[f], cov.phi_dd[f], f).col(static_cast<Eigen::Index>(reference)));
  return out;
}

double output_snr(const CovariancePair& cov, const BeamWeights& weights) {
  check_cov(cov);
  double num = 0.0, den = 0.0;
  for (std::size_t f = 0; f < cov.num_bins(); ++f) {
    const CVector& w = weights.w.at(f);
    num += (w.adjoint() * cov.phi_dd[f] * w)(0, 0).real();
    den += (w.adjoint() * cov.phi_uu[f] * w)(0, 0).real();
  }
  return num / den;
}

ReferenceChoice select_reference_detailed(const CovariancePair& cov) {
  check_cov(cov);
  const std::size_t M = cov.num_channels();
  ReferenceChoice choice;
  choice.snr.assign(M, std::nullopt);

  // The normalised filter matrix is shared by all references; only its
  // column changes.
  std::vector<CMatrix> filters;
  filters.reserve(cov.num_bins());
  try {
    for (std::size_t f = 0; f < cov.num_bins(); ++f)
      filters.push_back(normalized_filter(cov.phi_uu[f], cov.phi_dd[f], f));
  } catch (const Error& e) {
    throw Error(fmt::format("reference selection: MVDR failed for every candidate: {}", e.what()));
  }

  bool found = false;
  double best = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    double num = 0.0, den = 0.0;
    for (std::size_t f = 0; f < cov.num_bins(); ++f) {
      const auto w = filters[f].col(static_cast<Eigen::Index>(m));
      num += (w.adjoint() * cov.phi_dd[f] * w)(0, 0).real();
      den += (w.adjoint() * cov.phi_uu[f] * w)(0, 0).real();
    }
    const double snr = num / den;
    if (!std::isfinite(snr)) continue;
    choice.snr[m] = snr;
    if (!found || snr > best) {
      best = snr;
      choice.reference = m;
      found = true;
    }
  }
  if (!found) throw Error("reference selection: no candidate produced a finite output SNR");
  return choice;
}

std::size_t select_reference(const CovariancePair& cov) {
  return select_reference_detailed(cov).reference;
}

Spectrogram apply_beamformer(const Spectrogram& y, const BeamWeights& weights) {
  if (weights.w.size() != y.num_bins())
    throw Error(fmt::format("beamformer: {} weight vectors for {} bins", weights.w.size(),
                            y.num_bins()));
  for (const auto& w : weights.w)
    if (static_cast<std::size_t>(w.size()) != y.num_channels())
      throw Error(fmt::format("beamformer: weight length {} does not match {} channels",
                              w.size(), y.num_channels()));
  Spectrogram out(y.num_bins(), y.num_frames(), 1, y.frame_size(), y.hop(), y.signal_length(),
                  y.sample_rate());
  for (std::size_t n = 0; n < y.num_frames(); ++n) {
    for (std::size_t f = 0; f < y.num_bins(); ++f) {
      Complex acc = 0.0;
      for (std::size_t m = 0; m < y.num_channels(); ++m)
        acc += std::conj(weights.w[f](static_cast<Eigen::Index>(m))) * y(f, n, m);
      out(f, n, 0) = acc;
    }
  }
  return out;
}

Spectrogram apply_mask_floor(const Spectrogram& d, const TFMask& mask, double floor_db) {
  if (floor_db > 0.0)
    throw Error(fmt::format("mask floor must be <= 0 dB, got {}", floor_db));
  if (mask.num_bins() != d.num_bins() || mask.num_frames() != d.num_frames())
    throw Error("mask floor: mask shape does not match spectrogram");
  Spectrogram out = d;
  if (floor_db == 0.0) return out;
  const double floor = std::pow(10.0, floor_db / 20.0);
  for (std::size_t m = 0; m < d.num_channels(); ++m)
    for (std::size_t n = 0; n < d.num_frames(); ++n)
      for (std::size_t f = 0; f < d.num_bins(); ++f) out(f, n, m) *= std::max(mask(f, n), floor);
  return out;
}

}  // namespace mcenh
