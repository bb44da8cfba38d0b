// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/scene_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mcenh/error.hpp"

namespace mcenh {
namespace {

using nlohmann::json;

constexpr const char* kSceneFormat = "mcenh-scene-1";

json vec(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("scene file: expected a 3-element position");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string scene_to_text(const RoomScene& scene) {
  json j;
  j["format"] = kSceneFormat;
  j["seed"] = scene.seed;
  j["sample_rate"] = scene.sample_rate;
  j["room"] = vec(scene.room_dims);
  j["t60"] = scene.t60;
  j["array"] = to_string(scene.array_kind);
  j["source"] = vec(scene.source);
  j["mics"] = json::array();
  for (const auto& m : scene.mics) j["mics"].push_back(vec(m));
  json noise;
  noise["diffuse_rsnr_db"] =
      scene.noise.diffuse_rsnr_db ? json(*scene.noise.diffuse_rsnr_db) : json(nullptr);
  noise["directional"] = json::array();
  for (const auto& d : scene.noise.directional)
    noise["directional"].push_back({{"position", vec(d.position)}, {"rsnr_db", d.rsnr_db}});
  j["noise"] = noise;
  return j.dump(2) + "\n";
}

RoomScene scene_from_text(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != kSceneFormat)
      throw Error(fmt::format("scene file: unsupported format (expected {})", kSceneFormat));
    RoomScene scene;
    scene.seed = j.value("seed", std::uint64_t{0});
    scene.sample_rate = j.value("sample_rate", kDefaultSampleRate);
    scene.room_dims = vec(j.at("room"));
    scene.t60 = j.at("t60").get<double>();
    scene.array_kind = parse_array_kind(j.value("array", std::string("explicit")));
    scene.source = vec(j.at("source"));
    for (const auto& m : j.at("mics")) scene.mics.push_back(vec(m));
    if (j.contains("noise")) {
      const json& noise = j["noise"];
      if (noise.contains("diffuse_rsnr_db") && !noise["diffuse_rsnr_db"].is_null())
        scene.noise.diffuse_rsnr_db = noise["diffuse_rsnr_db"].get<double>();
      if (noise.contains("directional"))
        for (const auto& d : noise["directional"])
          scene.noise.directional.push_back({vec(d.at("position")), d.at("rsnr_db").get<double>()});
    }
    scene.validate();
    return scene;
  } catch (const json::exception& e) {
    throw Error(fmt::format("scene file: {}", e.what()));
  }
}

void write_scene_file(const std::filesystem::path& path, const RoomScene& scene) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  f << scene_to_text(scene);
  if (!f) throw Error(fmt::format("{}: write failed", path.string()));
}

RoomScene read_scene_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(fmt::format("{}: cannot open for reading", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return scene_from_text(ss.str());
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace mcenh
