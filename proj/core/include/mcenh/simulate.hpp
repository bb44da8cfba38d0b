// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mcenh/signal.hpp"

namespace mcenh {

inline constexpr double kSpeedOfSound = 343.0;        // m/s
inline constexpr double kWallClearance = 0.5;         // m
inline constexpr double kEarlyWindowSeconds = 0.05;   // after the direct path
inline constexpr std::size_t kRsnrReferenceMic = 0;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(Vec3 a, Vec3 b);

enum class ArrayKind { kCircular7, kRectangular6, kRandom, kExplicit };

std::string to_string(ArrayKind kind);
ArrayKind parse_array_kind(std::string_view name);

// Array layouts relative to the array centre in the horizontal plane, listed
// in the usual 1-based channel numbering order.
// circular7: six mics on a 7 cm diameter circle (0, 60, ..., 300 deg), centre
// mic last. rectangular6: two rows of three, 19 cm between rows, 20 cm across.
std::vector<Vec3> circular7_layout();
std::vector<Vec3> rectangular6_layout();

struct DirectionalNoise {
  Vec3 position;
  double rsnr_db = 0.0;
};

struct NoisePlan {
  std::optional<double> diffuse_rsnr_db;
  std::vector<DirectionalNoise> directional;
};

struct RoomScene {
  Vec3 room_dims;  // width, length, height
  double t60 = 0.3;
  Vec3 source;
  std::vector<Vec3> mics;
  ArrayKind array_kind = ArrayKind::kExplicit;
  NoisePlan noise;
  std::uint64_t seed = 0;
  int sample_rate = kDefaultSampleRate;

  // Positions strictly inside the room, t60 positive, at least one mic.
  void validate() const;
  // Minimum distance of any source or mic to the closest wall.
  double min_wall_clearance() const;
  std::size_t closest_mic() const;
  RoomScene select_mics(std::span<const std::size_t> channels) const;
};

enum class NoiseMode { kMixed, kDiffuseOnly, kNone };

struct SceneOptions {
  NoiseMode noise = NoiseMode::kMixed;
  double rsnr_min_db = -5.0;
  double rsnr_max_db = 20.0;
  int max_attempts = 10000;
};

// Draws room size, reverberation time, array and source placement and a noise
// plan. Rooms whose Sabine absorption would exceed 1 for the drawn t60 are
// redrawn; geometry that cannot honour the wall clearance is redrawn too.
RoomScene sample_scene(ArrayKind kind, std::uint64_t seed, const SceneOptions& opts = {});

// Uniform wall absorption for the target t60 from Sabine's formula.
double sabine_absorption(Vec3 room_dims, double t60, double c = kSpeedOfSound);

struct RirOptions {
  int sample_rate = kDefaultSampleRate;
  std::size_t length = 0;                 // 0: ceil(t60 * fs)
  std::optional<double> reflection;       // overrides the Sabine-derived value
  int max_order = -1;                     // -1: all images within the length
  double speed_of_sound = kSpeedOfSound;
};

// Allen-Berkley image method with Hann-windowed sinc fractional delays
// (8 ms interpolation window) and frequency-independent wall reflection.
std::vector<double> image_method_rir(Vec3 room_dims, double t60, Vec3 source, Vec3 mic,
                                     const RirOptions& opts = {});

// Direct-path delay in samples.
double direct_delay(Vec3 source, Vec3 mic, int sample_rate = kDefaultSampleRate,
                    double c = kSpeedOfSound);

struct RIRSet {
  std::vector<std::vector<double>> responses;  // per mic
  std::vector<std::size_t> early_split;        // first late sample per mic
};

RIRSet compute_rirs(const RoomScene& scene, Vec3 source,
                    double early_window = kEarlyWindowSeconds);

struct SceneRirs {
  RIRSet speech;
  std::vector<RIRSet> interferers;  // one per directional noise source
};

SceneRirs compute_scene_rirs(const RoomScene& scene);

// Target spatial coherence sin(x)/x, x = 2 pi f d / c, for every mic pair.
Eigen::MatrixXd diffuse_coherence(std::span<const Vec3> mics, double frequency,
                                  double c = kSpeedOfSound);

// Spherically isotropic noise: independent white Gaussian STFT frames mixed
// per bin by a Cholesky factor of the target coherence (eigenvalues floored
// at 1e-10). Each channel has approximately unit variance.
Waveform diffuse_noise(std::span<const Vec3> mics, std::size_t num_samples, std::uint64_t seed,
                       int sample_rate = kDefaultSampleRate, double c = kSpeedOfSound);

struct SceneMix {
  Waveform mixture;
  Waveform reverberant;   // speech image = early + late
  Waveform early_image;
  Waveform late_image;
  std::vector<Waveform> noise_components;  // already scaled to their RSNR
  std::vector<double> rsnr_targets_db;     // parallel to noise_components
};

// Convolves the clean source with the scene RIRs and adds each noise component
// scaled so that reverberant speech / component energy at kRsnrReferenceMic
// equals its RSNR target. The diffuse component (if planned) comes first,
// directional components follow in plan order. Directional sources default to
// white Gaussian noise; supplied sources are looped or trimmed to length.
SceneMix mix_scene(const Waveform& clean, const RoomScene& scene, const SceneRirs& rirs,
                   std::span<const Waveform> directional_sources = {});

// Deterministic speech-like test signal: voiced syllables with gliding pitch
// and formant-shaped harmonics, occasional fricatives, pauses in between.
// The dry source as it arrives at `mic`: shifted by the rounded direct-path
// delay and truncated to the input length. Used as the metric reference.
std::vector<double> clean_at_mic(std::span<const double> clean, const RoomScene& scene,
                                 std::size_t mic);

std::vector<double> synth_speech(std::size_t num_samples, std::uint64_t seed,
                                 int sample_rate = kDefaultSampleRate);

}  // namespace mcenh
