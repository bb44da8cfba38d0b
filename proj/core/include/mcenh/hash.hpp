// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>

namespace mcenh {

// 64-bit FNV-1a. Stable across platforms, used for RNG stream keys and
// reproducibility digests.
class Fnv1a {
 public:
  Fnv1a& update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& update(std::string_view text) {
    return update(std::as_bytes(std::span(text.data(), text.size())));
  }
  Fnv1a& update(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    return update(std::as_bytes(std::span(&bits, 1)));
  }
  Fnv1a& update(std::span<const double> values) {
    for (double v : values) update(v);
    return *this;
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view text) { return Fnv1a().update(text).digest(); }

}  // namespace mcenh
