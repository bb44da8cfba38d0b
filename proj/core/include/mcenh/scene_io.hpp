// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mcenh/simulate.hpp"

namespace mcenh {

// Human-readable JSON scene description:
//   {"format": "mcenh-scene-1", "seed": ..., "sample_rate": 16000,
//    "room": [w, l, h], "t60": ..., "array": "circular7",
//    "source": [x, y, z], "mics": [[x, y, z], ...],
//    "noise": {"diffuse_rsnr_db": ... | null,
//              "directional": [{"position": [x, y, z], "rsnr_db": ...}, ...]}}
std::string scene_to_text(const RoomScene& scene);
RoomScene scene_from_text(std::string_view text);

void write_scene_file(const std::filesystem::path& path, const RoomScene& scene);
RoomScene read_scene_file(const std::filesystem::path& path);

}  // namespace mcenh
