// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <optional>

#include "mcenh/beamform.hpp"
#include "mcenh/mask_net.hpp"
#include "mcenh/signal.hpp"
#include "mcenh/tf_mask.hpp"

namespace mcenh {

enum class MaskSource { kOracle, kNet };

struct EnhanceOptions {
  MaskSource mask = MaskSource::kOracle;
  // Single-channel post-mask floor in dB; unset skips post-masking.
  std::optional<double> gmin_db;
  // Fixed reference channel; unset selects it by maximum output SNR.
  std::optional<std::size_t> reference;
  std::size_t frame_size = kDefaultFrameSize;
};

struct EnhanceResult {
  Waveform output;  // mono, same length and rate as the input
  std::size_t reference = 0;
  std::size_t mask_channel = 0;  // oracle mode: channel the mask was derived from
  TFMask mask;
};

// Channel whose early image carries the most energy (the closest mic for a
// point source); the oracle mask is computed there unless a fixed reference is
// requested.
std::size_t strongest_channel(const Waveform& image);

// STFT -> mask -> covariances -> MVDR (fixed or selected reference) ->
// optional mask floor -> iSTFT.
// Oracle mode needs `early_image` (same shape as `mixture`); net mode needs
// `net`.
EnhanceResult enhance(const Waveform& mixture, const EnhanceOptions& opts,
                      const Waveform* early_image = nullptr, const MaskNet* net = nullptr);

}  // namespace mcenh
