// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>

#include "mcenh/signal.hpp"

namespace mcenh {

enum class SampleFormat { kPcm16, kFloat32 };

// Reads a little-endian RIFF/WAVE file holding 16-bit PCM or 32-bit float
// samples (plain or WAVE_FORMAT_EXTENSIBLE). When expected_rate is set, a file
// with a different rate is rejected; there is no resampling.
Waveform read_wav(const std::filesystem::path& path,
                  std::optional<int> expected_rate = kDefaultSampleRate);

// PCM16 output is clipped to [-1, 1).
void write_wav(const std::filesystem::path& path, const Waveform& wave,
               SampleFormat format = SampleFormat::kFloat32);

}  // namespace mcenh
