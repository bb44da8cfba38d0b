// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mcenh/error.hpp"
#include "mcenh/signal.hpp"
#include "mcenh/tf_mask.hpp"

namespace mcenh {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Per-subband spatial covariances of the desired and undesired components.
struct CovariancePair {
  std::vector<CMatrix> phi_dd;
  std::vector<CMatrix> phi_uu;

  std::size_t num_bins() const { return phi_dd.size(); }
  std::size_t num_channels() const {
    return phi_dd.empty() ? 0 : static_cast<std::size_t>(phi_dd.front().rows());
  }
};

struct BeamWeights {
  std::vector<CVector> w;  // one M-vector per subband
  std::size_t reference = 0;
};

// Raised when a mask leaves a subband without desired or undesired weight.
class DegenerateMaskError : public Error {
 public:
  DegenerateMaskError(std::size_t subband, const std::string& what)
      : Error(what), subband_(subband) {}
  std::size_t subband() const { return subband_; }

 private:
  std::size_t subband_;
};

inline constexpr double kOracleMaskEps = 1e-12;
inline constexpr double kMvdrRegularization = 1e-6;
inline constexpr double kMinMvdrTrace = 1e-12;

// Wiener-like mask |d|^2 / (|d|^2 + |y - d|^2 + eps) from the desired image
// `desired` (1 channel) and the mixture at the same channel (`mixture_channel`).
TFMask oracle_mask(const Spectrogram& desired, const Spectrogram& mixture,
                   std::size_t mixture_channel = 0);

// Mask-weighted, normalised outer-product sums. Each subband needs
// sum_n g > 1e-6 N and sum_n (1 - g) > 1e-6 N.
CovariancePair estimate_covariances(const Spectrogram& y, const TFMask& mask);

// Diagonal loading: phi + trace(phi) * 1e-6 * I.
CMatrix regularize(const CMatrix& phi);

// Solves phi_uu X = phi_dd after loading; throws when the loaded matrix is not
// positive definite.
CMatrix mvdr_solve(const CMatrix& phi_uu, const CMatrix& phi_dd);

// Weight vector for one subband; throws when trace(phi_uu^-1 phi_dd) vanishes.
CVector mvdr_vector(const CMatrix& phi_uu, const CMatrix& phi_dd, std::size_t reference);

BeamWeights mvdr_weights(const CovariancePair& cov, std::size_t reference);

// Average output SNR of the reference-r beamformer (ratio of subband sums).
double output_snr(const CovariancePair& cov, const BeamWeights& weights);

// Reference maximising the average output SNR; ties go to the lowest index.
// Candidates whose MVDR weights cannot be computed are skipped.
std::size_t select_reference(const CovariancePair& cov);

struct ReferenceChoice {
  std::size_t reference = 0;
  std::vector<std::optional<double>> snr;  // per candidate, empty when it failed
};
ReferenceChoice select_reference_detailed(const CovariancePair& cov);

// d(f, n) = w(f)^H y(f, n).
Spectrogram apply_beamformer(const Spectrogram& y, const BeamWeights& weights);

// Multiplies by max(g, 10^(floor_db / 20)). floor_db = 0 leaves the input
// untouched.
Spectrogram apply_mask_floor(const Spectrogram& d, const TFMask& mask, double floor_db);

}  // namespace mcenh
