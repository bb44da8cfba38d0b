// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mcenh/error.hpp"

namespace mcenh {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::vector<char>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.append(raw, sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path, std::optional<int> expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path.string()));
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw Error(fmt::format("{}: not a RIFF/WAVE file", path.string()));

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_pos = 0, data_len = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto len = load<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (len < 16 || body + len > buf.size())
        throw Error(fmt::format("{}: malformed fmt chunk", path.string()));
      format = load<std::uint16_t>(buf, body);
      channels = load<std::uint16_t>(buf, body + 2);
      rate = load<std::uint32_t>(buf, body + 4);
      bits = load<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible) {
        if (len < 40) throw Error(fmt::format("{}: malformed extensible fmt chunk", path.string()));
        format = load<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = buf.size() - body;
      // Streaming writers leave the size as 0 or 0xFFFFFFFF; anything else
      // must be present in full.
      if (len != 0 && len != 0xFFFFFFFFu) {
        if (len > data_len)
          throw Error(fmt::format("{}: data chunk truncated ({} of {} bytes)", path.string(),
                                  data_len, len));
        data_len = len;
      }
      have_data = true;
      break;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt || !have_data)
    throw Error(fmt::format("{}: missing fmt or data chunk", path.string()));
  if (channels == 0) throw Error(fmt::format("{}: zero channels", path.string()));
  if (expected_rate && static_cast<int>(rate) != *expected_rate)
    throw Error(fmt::format("{}: sample rate {} Hz does not match expected {} Hz",
                            path.string(), rate, *expected_rate));

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw Error(fmt::format("{}: unsupported sample format (tag {}, {} bits)",
                            path.string(), format, bits));

  const std::size_t bytes = bits / 8;
  const std::size_t frames = data_len / (bytes * channels);
  Waveform wave(channels, frames, static_cast<int>(rate));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < channels; ++m) {
      const std::size_t at = data_pos + (t * channels + m) * bytes;
      wave(m, t) = pcm16 ? load<std::int16_t>(buf, at) / 32768.0
                         : static_cast<double>(load<float>(buf, at));
    }
  }
  wave.validate();
  return wave;
}

void write_wav(const std::filesystem::path& path, const Waveform& wave,
               SampleFormat format) {
  const std::uint16_t channels = static_cast<std::uint16_t>(wave.num_channels());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint16_t tag = format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t block = channels * (bits / 8);
  const std::uint32_t data_len = static_cast<std::uint32_t>(wave.num_samples() * block);

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put<std::uint32_t>(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, tag);
  put<std::uint16_t>(out, channels);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate()) * block);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(block));
  put<std::uint16_t>(out, bits);
  out.append("data");
  put<std::uint32_t>(out, data_len);
  for (std::size_t t = 0; t < wave.num_samples(); ++t) {
    for (std::size_t m = 0; m < wave.num_channels(); ++m) {
      const double v = wave(m, t);
      if (format == SampleFormat::kPcm16) {
        const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
        put<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
      } else {
        put<float>(out, static_cast<float>(v));
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(fmt::format("{}: write failed", path.string()));
}

}  // namespace mcenh
