// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/pipeline.hpp"

#include <fmt/format.h>

#include "mcenh/error.hpp"
#include "mcenh/features.hpp"
#include "mcenh/metrics.hpp"

namespace mcenh {

std::size_t strongest_channel(const Waveform& image) {
  if (image.num_channels() == 0) throw Error("empty image");
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t m = 0; m < image.num_channels(); ++m) {
    const double e = energy(image.channel(m));
    if (e > best_energy) {
      best_energy = e;
      best = m;
    }
  }
  return best;
}

EnhanceResult enhance(const Waveform& mixture, const EnhanceOptions& opts,
                      const Waveform* early_image, const MaskNet* net) {
  mixture.validate();
  if (mixture.empty()) throw Error("enhance: empty input");
  const std::size_t M = mixture.num_channels();
  if (opts.reference && *opts.reference >= M)
    throw Error(fmt::format("enhance: reference {} out of range for {} channels", *opts.reference, M));

  const Spectrogram y = stft(mixture, opts.frame_size, opts.frame_size / 2);
  EnhanceResult result;

  if (opts.mask == MaskSource::kOracle) {
    if (!early_image) throw Error("enhance: oracle mask requires the early speech image");
    if (early_image->num_channels() != M || early_image->num_samples() != mixture.num_samples())
      throw Error(fmt::format("enhance: early image is {}x{}, mixture {}x{}",
                              early_image->num_channels(), early_image->num_samples(), M,
                              mixture.num_samples()));
    result.mask_channel = opts.reference ? *opts.reference : strongest_channel(*early_image);
    const std::size_t ch = result.mask_channel;
    const Spectrogram d = stft(early_image->select_channels(std::span(&ch, 1)), opts.frame_size,
                               opts.frame_size / 2);
    result.mask = oracle_mask(d, y, result.mask_channel);
  } else {
    if (!net) throw Error("enhance: net mask requires loaded weights");
    result.mask = net->forward(normalize_features(extract_features(y)));
    if (result.mask.num_bins() != y.num_bins())
      throw Error("enhance: network output width does not match the STFT");
  }

  const CovariancePair cov = estimate_covariances(y, result.mask);
  result.reference = opts.reference ? *opts.reference : select_reference(cov);
  Spectrogram d = apply_beamformer(y, mvdr_weights(cov, result.reference));
  if (opts.gmin_db) d = apply_mask_floor(d, result.mask, *opts.gmin_db);
  result.output = istft(d);
  return result;
}

}  // namespace mcenh
