// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "mcenh/error.hpp"
#include "mcenh/hash.hpp"
#include "mcenh/metrics.hpp"

namespace mcenh {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCircularDiameter = 0.07;
constexpr double kRectRowSpacing = 0.19;
constexpr double kRectColumnSpan = 0.20;
constexpr double kCoherenceEigenFloor = 1e-10;
constexpr std::size_t kDiffuseFrame = 512;

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
  const std::uint64_t key = fnv1a(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double wall_clearance(Vec3 p, Vec3 dims) {
  return std::min({p.x, dims.x - p.x, p.y, dims.y - p.y, p.z, dims.z - p.z});
}

Vec3 random_position(std::mt19937_64& rng, Vec3 dims, double z_lo, double z_hi) {
  return {uniform(rng, kWallClearance, dims.x - kWallClearance),
          uniform(rng, kWallClearance, dims.y - kWallClearance), uniform(rng, z_lo, z_hi)};
}

std::vector<Vec3> place_compact(const std::vector<Vec3>& layout, Vec3 centre, double azimuth) {
  const double c = std::cos(azimuth), s = std::sin(azimuth);
  std::vector<Vec3> out;
  out.reserve(layout.size());
  for (const auto& p : layout)
    out.push_back({centre.x + c * p.x - s * p.y, centre.y + s * p.x + c * p.y, centre.z + p.z});
  return out;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace

double distance(Vec3 a, Vec3 b) {
  const Vec3 d = a - b;
  return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

std::string to_string(ArrayKind kind) {
  switch (kind) {
    case ArrayKind::kCircular7: return "circular7";
    case ArrayKind::kRectangular6: return "rectangular6";
    case ArrayKind::kRandom: return "random";
    case ArrayKind::kExplicit: return "explicit";
  }
  return "explicit";
}

ArrayKind parse_array_kind(std::string_view name) {
  if (name == "circular7") return ArrayKind::kCircular7;
  if (name == "rectangular6") return ArrayKind::kRectangular6;
  if (name == "random") return ArrayKind::kRandom;
  if (name == "explicit") return ArrayKind::kExplicit;
  throw Error(fmt::format("unknown array kind '{}'", name));
}

std::vector<Vec3> circular7_layout() {
  const double r = kCircularDiameter / 2.0;
  std::vector<Vec3> mics;
  for (int i = 0; i < 6; ++i) {
    const double a = kPi / 3.0 * i;
    mics.push_back({r * std::cos(a), r * std::sin(a), 0.0});
  }
  mics.push_back({0.0, 0.0, 0.0});
  return mics;
}

std::vector<Vec3> rectangular6_layout() {
  const double dx = kRectColumnSpan / 2.0;
  const double dy = kRectRowSpacing / 2.0;
  return {{-dx, dy, 0.0}, {0.0, dy, 0.0}, {dx, dy, 0.0},
          {-dx, -dy, 0.0}, {0.0, -dy, 0.0}, {dx, -dy, 0.0}};
}

void RoomScene::validate() const {
  if (!(room_dims.x > 0 && room_dims.y > 0 && room_dims.z > 0))
    throw Error("scene: room dimensions must be positive");
  if (!(t60 > 0)) throw Error("scene: t60 must be positive");
  if (mics.empty()) throw Error("scene: no microphones");
  if (sample_rate <= 0) throw Error("scene: sample rate must be positive");
  auto inside = [&](Vec3 p, const std::string& what) {
    if (!(wall_clearance(p, room_dims) > 0))
      throw Error(fmt::format("scene: {} at ({}, {}, {}) is outside the room", what, p.x, p.y, p.z));
  };
  inside(source, "source");
  for (std::size_t m = 0; m < mics.size(); ++m) inside(mics[m], fmt::format("mic {}", m));
  for (std::size_t k = 0; k < noise.directional.size(); ++k)
    inside(noise.directional[k].position, fmt::format("noise source {}", k));
}

double RoomScene::min_wall_clearance() const {
  double c = wall_clearance(source, room_dims);
  for (const auto& m : mics) c = std::min(c, wall_clearance(m, room_dims));
  for (const auto& n : noise.directional) c = std::min(c, wall_clearance(n.position, room_dims));
  return c;
}

std::size_t RoomScene::closest_mic() const {
  if (mics.empty()) throw Error("scene: no microphones");
  std::size_t best = 0;
  for (std::size_t m = 1; m < mics.size(); ++m)
    if (distance(mics[m], source) < distance(mics[best], source)) best = m;
  return best;
}

RoomScene RoomScene::select_mics(std::span<const std::size_t> channels) const {
  RoomScene out = *this;
  out.mics.clear();
  for (auto c : channels) {
    if (c >= mics.size()) throw Error(fmt::format("scene: mic {} out of range", c));
    out.mics.push_back(mics[c]);
  }
  return out;
}

double sabine_absorption(Vec3 d, double t60, double c) {
  const double volume = d.x * d.y * d.z;
  const double surface = 2.0 * (d.x * d.y + d.x * d.z + d.y * d.z);
  return 24.0 * std::log(10.0) * volume / (c * surface * t60);
}

RoomScene sample_scene(ArrayKind kind, std::uint64_t seed, const SceneOptions& opts) {
  if (kind == ArrayKind::kExplicit)
    throw Error("sample_scene: explicit arrays come from a scene file, not the sampler");
  auto rng = make_rng(seed, "scene");
  const std::vector<Vec3> layout = kind == ArrayKind::kCircular7 ? circular7_layout()
                                   : kind == ArrayKind::kRectangular6 ? rectangular6_layout()
                                                                      : std::vector<Vec3>{};
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    RoomScene scene;
    scene.seed = seed;
    scene.array_kind = kind;
    scene.room_dims = {uniform(rng, 3.0, 7.0), uniform(rng, 3.0, 9.0), uniform(rng, 2.3, 3.5)};
    scene.t60 = uniform(rng, 0.1, 0.5);
    if (sabine_absorption(scene.room_dims, scene.t60) > 1.0) continue;

    if (kind == ArrayKind::kRandom) {
      for (int m = 0; m < 6; ++m) scene.mics.push_back(random_position(rng, scene.room_dims, 1.0, 1.5));
    } else {
      const Vec3 centre = random_position(rng, scene.room_dims, 1.0, 1.5);
      scene.mics = place_compact(layout, centre, uniform(rng, 0.0, 2.0 * kPi));
    }
    scene.source = random_position(rng, scene.room_dims, 1.4, 1.8);

    if (opts.noise != NoiseMode::kNone) {
      scene.noise.diffuse_rsnr_db = uniform(rng, opts.rsnr_min_db, opts.rsnr_max_db);
      if (opts.noise == NoiseMode::kMixed &&
          std::bernoulli_distribution(0.5)(rng)) {
        const int count = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int k = 0; k < count; ++k) {
          DirectionalNoise n;
          n.position = random_position(rng, scene.room_dims, kWallClearance,
                                       scene.room_dims.z - kWallClearance);
          n.rsnr_db = uniform(rng, opts.rsnr_min_db, opts.rsnr_max_db);
          scene.noise.directional.push_back(n);
        }
      }
    }

    bool ok = scene.min_wall_clearance() >= kWallClearance;
    for (const auto& m : scene.mics) ok = ok && distance(m, scene.source) > 1e-3;
    for (std::size_t i = 0; ok && i < scene.mics.size(); ++i)
      for (std::size_t j = i + 1; ok && j < scene.mics.size(); ++j)
        ok = distance(scene.mics[i], scene.mics[j]) > 1e-3;
    if (ok) return scene;
  }
  throw Error(fmt::format("sample_scene: no valid {} scene after {} attempts (seed {})",
                          to_string(kind), opts.max_attempts, seed));
}

double direct_delay(Vec3 source, Vec3 mic, int sample_rate, double c) {
  return distance(source, mic) / c * sample_rate;
}

std::vector<double> image_method_rir(Vec3 dims, double t60, Vec3 source, Vec3 mic,
                                     const RirOptions& opts) {
  const double fs = opts.sample_rate;
  const double cts = opts.speed_of_sound / fs;
  if (distance(source, mic) < 1e-6) throw Error("image method: source coincides with microphone");
  if (wall_clearance(source, dims) <= 0 || wall_clearance(mic, dims) <= 0)
    throw Error("image method: source or microphone outside the room");

  double beta;
  if (opts.reflection) {
    beta = *opts.reflection;
  } else {
    if (!(t60 > 0)) throw Error("image method: t60 must be positive");
    const double alpha = sabine_absorption(dims, t60, opts.speed_of_sound);
    if (alpha > 1.0)
      throw Error(fmt::format("image method: t60 {} s is too short for a {}x{}x{} m room",
                              t60, dims.x, dims.y, dims.z));
    beta = std::sqrt(1.0 - alpha);
  }
  if (beta < 0.0 || beta > 1.0) throw Error("image method: reflection coefficient outside [0, 1]");

  std::size_t length = opts.length;
  if (length == 0) length = static_cast<std::size_t>(std::ceil(t60 * fs));
  const double direct = distance(source, mic) / cts;
  if (direct >= static_cast<double>(length))
    throw Error("image method: response too short to hold the direct path");
  const auto n_samples = static_cast<double>(length);
  std::vector<double> h(length, 0.0);

  // Geometry in samples.
  const double s[3] = {source.x / cts, source.y / cts, source.z / cts};
  const double r[3] = {mic.x / cts, mic.y / cts, mic.z / cts};
  const double L[3] = {dims.x / cts, dims.y / cts, dims.z / cts};
  const int n1 = static_cast<int>(std::ceil(n_samples / (2 * L[0])));
  const int n2 = static_cast<int>(std::ceil(n_samples / (2 * L[1])));
  const int n3 = static_cast<int>(std::ceil(n_samples / (2 * L[2])));

  // Interpolator: Hann window times sinc, Tw taps centred on the arrival.
  const int tw = 2 * static_cast<int>(std::lround(0.004 * fs));
  std::vector<double> win_cos(tw), win_sin(tw), lpi(tw);
  for (int n = 0; n < tw; ++n) {
    const double k = n - 0.5 * tw + 1;
    win_cos[n] = std::cos(2.0 * kPi * k / tw);
    win_sin[n] = std::sin(2.0 * kPi * k / tw);
  }

  const int max_exp = 2 * std::max({n1, n2, n3}) + 2;
  std::vector<double> beta_pow(max_exp + 1);
  for (int i = 0; i <= max_exp; ++i) beta_pow[i] = std::pow(beta, i);  // pow(0, 0) == 1

  for (int mx = -n1; mx <= n1; ++mx) {
    for (int my = -n2; my <= n2; ++my) {
      for (int mz = -n3; mz <= n3; ++mz) {
        for (int q = 0; q <= 1; ++q) {
          const double dx = (1 - 2 * q) * s[0] - r[0] + 2 * mx * L[0];
          const int ex = std::abs(mx - q) + std::abs(mx);
          for (int j = 0; j <= 1; ++j) {
            const double dy = (1 - 2 * j) * s[1] - r[1] + 2 * my * L[1];
            const int ey = std::abs(my - j) + std::abs(my);
            for (int k = 0; k <= 1; ++k) {
              const double dz = (1 - 2 * k) * s[2] - r[2] + 2 * mz * L[2];
              if (opts.max_order >= 0 &&
                  std::abs(2 * mx - q) + std::abs(2 * my - j) + std::abs(2 * mz - k) > opts.max_order)
                continue;
              const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
              const double fdist = std::floor(dist);
              if (fdist >= n_samples) continue;
              const int ez = std::abs(mz - k) + std::abs(mz);
              const double gain = beta_pow[ex] * beta_pow[ey] * beta_pow[ez] / (4 * kPi * dist * cts);
              if (gain == 0.0) continue;

              const double frac = dist - fdist;
              // sin(pi (k - frac)) = -(-1)^k sin(pi frac) for integer k.
              const double sin_frac = std::sin(kPi * (frac > 0.5 ? 1.0 - frac : frac));
              const double cos_shift = std::cos(2.0 * kPi * frac / tw);
              const double sin_shift = std::sin(2.0 * kPi * frac / tw);
              for (int n = 0; n < tw; ++n) {
                const int ki = n - tw / 2 + 1;
                const double t = ki - frac;
                // cos(2 pi (k - frac) / tw) by angle subtraction.
                const double window =
                    0.5 * (1.0 + win_cos[n] * cos_shift + win_sin[n] * sin_shift);
                double sinc_val;
                if (frac < 1e-12) {
                  sinc_val = ki == 0 ? 1.0 : 0.0;
                } else {
                  const double sign = (ki % 2 == 0) ? -1.0 : 1.0;
                  sinc_val = sign * sin_frac / (kPi * t);
                }
                lpi[n] = window * sinc_val;
              }
              const long start = static_cast<long>(fdist) - tw / 2 + 1;
              for (int n = 0; n < tw; ++n) {
                const long pos = start + n;
                if (pos >= 0 && pos < static_cast<long>(length)) h[pos] += gain * lpi[n];
              }
            }
          }
        }
      }
    }
  }
  return h;
}

RIRSet compute_rirs(const RoomScene& scene, Vec3 source, double early_window) {
  RIRSet set;
  RirOptions opts;
  opts.sample_rate = scene.sample_rate;
  for (const auto& mic : scene.mics) {
    set.responses.push_back(image_method_rir(scene.room_dims, scene.t60, source, mic, opts));
    const auto split = static_cast<std::size_t>(
        std::ceil(direct_delay(source, mic, scene.sample_rate) + early_window * scene.sample_rate));
    set.early_split.push_back(std::min(split, set.responses.back().size()));
  }
  return set;
}

SceneRirs compute_scene_rirs(const RoomScene& scene) {
  scene.validate();
  SceneRirs out;
  out.speech = compute_rirs(scene, scene.source);
  for (const auto& n : scene.noise.directional)
    out.interferers.push_back(compute_rirs(scene, n.position));
  return out;
}

Eigen::MatrixXd diffuse_coherence(std::span<const Vec3> mics, double frequency, double c) {
  const auto M = static_cast<Eigen::Index>(mics.size());
  Eigen::MatrixXd gamma(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j)
      gamma(i, j) = sinc(2.0 * kPi * frequency *
                         distance(mics[static_cast<std::size_t>(i)], mics[static_cast<std::size_t>(j)]) / c);
  return gamma;
}

Waveform diffuse_noise(std::span<const Vec3> mics, std::size_t num_samples, std::uint64_t seed,
                       int sample_rate, double c) {
  const std::size_t M = mics.size();
  if (M < 2) throw Error("diffuse noise needs at least two microphones");
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = i + 1; j < M; ++j)
      if (distance(mics[i], mics[j]) < 1e-9)
        throw Error(fmt::format("diffuse noise: microphones {} and {} coincide", i, j));
  if (num_samples == 0) throw Error("diffuse noise: zero duration");

  auto rng = make_rng(seed, "diffuse");
  std::normal_distribution<double> normal(0.0, 1.0);
  Waveform white(M, num_samples, sample_rate);
  for (std::size_t m = 0; m < M; ++m)
    for (auto& v : white.channel(m)) v = normal(rng);

  const Spectrogram in = stft(white, kDiffuseFrame, kDiffuseFrame / 2);
  Spectrogram out = in;
  const auto Mi = static_cast<Eigen::Index>(M);
  Eigen::VectorXcd v(Mi);
  for (std::size_t f = 0; f < in.num_bins(); ++f) {
    const double freq = static_cast<double>(f) * sample_rate / static_cast<double>(kDiffuseFrame);
    const Eigen::MatrixXd gamma = diffuse_coherence(mics, freq, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma);
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(kCoherenceEigenFloor);
    const Eigen::MatrixXd floored =
        eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd mixing = floored.llt().matrixL();
    for (std::size_t n = 0; n < in.num_frames(); ++n) {
      for (std::size_t m = 0; m < M; ++m) v(static_cast<Eigen::Index>(m)) = in(f, n, m);
      const Eigen::VectorXcd mixed = mixing * v;
      for (std::size_t m = 0; m < M; ++m) out(f, n, m) = mixed(static_cast<Eigen::Index>(m));
    }
  }
  return istft(out);
}

namespace {

std::vector<double> convolve_truncated(std::span<const double> x, std::span<const double> h,
                                       std::size_t length) {
  auto y = convolve(x, h);
  y.resize(length, 0.0);
  return y;
}

// Returns a copy of `src` (mono) looped or trimmed to `length`.
std::vector<double> fit_length(const Waveform& src, std::size_t length) {
  if (src.num_channels() != 1 || src.num_samples() == 0)
    throw Error("directional noise sources must be non-empty mono signals");
  auto samples = src.channel(0);
  std::vector<double> out(length);
  for (std::size_t t = 0; t < length; ++t) out[t] = samples[t % samples.size()];
  return out;
}

}  // namespace

SceneMix mix_scene(const Waveform& clean, const RoomScene& scene, const SceneRirs& rirs,
                   std::span<const Waveform> directional_sources) {
  if (clean.num_channels() != 1) throw Error("mix_scene: clean source must be mono");
  if (clean.sample_rate() != scene.sample_rate)
    throw Error(fmt::format("mix_scene: clean source at {} Hz, scene at {} Hz",
                            clean.sample_rate(), scene.sample_rate));
  if (!(energy(clean.channel(0)) > 0.0)) throw Error("mix_scene: clean source has zero energy");
  const std::size_t M = scene.mics.size();
  if (rirs.speech.responses.size() != M) throw Error("mix_scene: RIR count does not match mics");
  if (rirs.interferers.size() != scene.noise.directional.size())
    throw Error("mix_scene: interferer RIRs do not match the noise plan");
  if (!directional_sources.empty() && directional_sources.size() != scene.noise.directional.size())
    throw Error("mix_scene: supplied directional sources do not match the noise plan");
  for (const auto& src : directional_sources)
    if (src.sample_rate() != scene.sample_rate)
      throw Error("mix_scene: directional source sample rate does not match the scene");

  const std::size_t T = clean.num_samples();
  const int fs = scene.sample_rate;
  SceneMix mix;
  mix.early_image = Waveform(M, T, fs);
  mix.late_image = Waveform(M, T, fs);
  mix.reverberant = Waveform(M, T, fs);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& h = rirs.speech.responses[m];
    const std::size_t split = rirs.speech.early_split[m];
    const std::span<const double> early(h.data(), split);
    const std::span<const double> late(h.data() + split, h.size() - split);
    auto e = convolve_truncated(clean.channel(0), early, T);
    std::vector<double> l(T, 0.0);
    if (!late.empty()) {
      // The late part starts `split` samples into the response.
      auto tail = convolve(clean.channel(0), late);
      for (std::size_t t = split; t < T; ++t) l[t] = tail[t - split];
    }
    for (std::size_t t = 0; t < T; ++t) {
      mix.early_image(m, t) = e[t];
      mix.late_image(m, t) = l[t];
      mix.reverberant(m, t) = e[t] + l[t];
    }
  }
  const double speech_energy = energy(mix.reverberant.channel(kRsnrReferenceMic));
  if (!(speech_energy > 0.0)) throw Error("mix_scene: reverberant speech has zero energy");

  auto add_component = [&](Waveform component, double rsnr_db) {
    const double e = energy(component.channel(kRsnrReferenceMic));
    if (!(e > 0.0)) throw Error("mix_scene: noise component has zero energy at the reference mic");
    const double gain = std::sqrt(speech_energy / (e * std::pow(10.0, rsnr_db / 10.0)));
    for (std::size_t m = 0; m < M; ++m)
      for (auto& v : component.channel(m)) v *= gain;
    mix.noise_components.push_back(std::move(component));
    mix.rsnr_targets_db.push_back(rsnr_db);
  };

  if (scene.noise.diffuse_rsnr_db) {
    if (M < 2) throw Error("mix_scene: diffuse noise needs at least two microphones");
    add_component(diffuse_noise(scene.mics, T, scene.seed, fs), *scene.noise.diffuse_rsnr_db);
  }
  for (std::size_t k = 0; k < scene.noise.directional.size(); ++k) {
    std::vector<double> source;
    if (directional_sources.empty()) {
      auto rng = make_rng(scene.seed, fmt::format("directional{}", k));
      std::normal_distribution<double> normal(0.0, 1.0);
      source.resize(T);
      for (auto& v : source) v = normal(rng);
    } else {
      source = fit_length(directional_sources[k], T);
    }
    Waveform component(M, T, fs);
    for (std::size_t m = 0; m < M; ++m) {
      auto y = convolve_truncated(source, rirs.interferers[k].responses[m], T);
      std::copy(y.begin(), y.end(), component.channel(m).begin());
    }
    add_component(std::move(component), scene.noise.directional[k].rsnr_db);
  }

  mix.mixture = mix.reverberant;
  for (const auto& comp : mix.noise_components)
    for (std::size_t m = 0; m < M; ++m) {
      auto dst = mix.mixture.channel(m);
      auto src = comp.channel(m);
      for (std::size_t t = 0; t < T; ++t) dst[t] += src[t];
    }
  return mix;
}

std::vector<double> clean_at_mic(std::span<const double> clean, const RoomScene& scene,
                                 std::size_t mic) {
  if (mic >= scene.mics.size())
    throw Error(fmt::format("clean_at_mic: microphone {} out of range for {} mics", mic,
                            scene.mics.size()));
  const auto delay = static_cast<std::size_t>(
      std::lround(direct_delay(scene.source, scene.mics[mic], scene.sample_rate)));
  std::vector<double> out(clean.size(), 0.0);
  for (std::size_t t = delay; t < clean.size(); ++t) out[t] = clean[t - delay];
  return out;
}

std::vector<double> synth_speech(std::size_t num_samples, std::uint64_t seed, int sample_rate) {
  auto rng = make_rng(seed, "speech");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double fs = sample_rate;
  std::vector<double> out(num_samples, 0.0);

  std::size_t pos = static_cast<std::size_t>(uniform(rng, 0.05, 0.2) * fs);
  while (pos < num_samples) {
    const auto len = static_cast<std::size_t>(uniform(rng, 0.12, 0.35) * fs);
    const bool voiced = std::bernoulli_distribution(0.8)(rng);
    const double level = uniform(rng, 0.5, 1.0);
    if (voiced) {
      const double f0_start = uniform(rng, 90.0, 220.0);
      const double f0_end = f0_start * uniform(rng, 0.8, 1.2);
      const double formant[3] = {uniform(rng, 300, 900), uniform(rng, 900, 2500),
                                 uniform(rng, 2300, 3500)};
      const double bandwidth[3] = {90.0, 130.0, 180.0};
      const double formant_gain[3] = {1.0, 0.5, 0.25};
      double phase = uniform(rng, 0.0, 2 * kPi);
      double prev = 0.0;
      for (std::size_t i = 0; i < len && pos + i < num_samples; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(len);
        const double f0 = f0_start + (f0_end - f0_start) * u;
        phase += 2 * kPi * f0 / fs;
        const double env = level * std::sin(kPi * u);
        double acc = 0.0;
        for (int h = 1; h * f0 < std::min(4000.0, fs / 2); ++h) {
          double a = 0.02;
          for (int k = 0; k < 3; ++k) {
            const double z = (h * f0 - formant[k]) / bandwidth[k];
            a += formant_gain[k] * std::exp(-0.5 * z * z);
          }
          acc += a * std::sin(h * phase);
        }
        // Aspiration: weak high-passed noise riding on the voiced excitation.
        const double w = normal(rng);
        acc += 0.03 * (w - prev);
        prev = w;
        out[pos + i] += env * acc;
      }
    } else {
      // Fricative: first-difference (high-pass) noise burst.
      double prev = 0.0;
      for (std::size_t i = 0; i < len && pos + i < num_samples; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(len);
        const double w = normal(rng);
        out[pos + i] += 0.3 * level * std::sin(kPi * u) * (w - prev);
        prev = w;
      }
    }
    pos += len + static_cast<std::size_t>(uniform(rng, 0.03, 0.25) * fs);
  }

  const double rms = std::sqrt(energy(out) / std::max<std::size_t>(1, num_samples));
  if (rms > 0)
    for (auto& v : out) v *= 0.05 / rms;
  return out;
}

}  // namespace mcenh
