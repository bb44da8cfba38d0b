// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "commands.hpp"
#include "mcenh/beamform.hpp"
#include "mcenh/error.hpp"
#include "mcenh/features.hpp"
#include "mcenh/hash.hpp"
#include "mcenh/mask_net.hpp"
#include "mcenh/metrics.hpp"
#include "mcenh/scene_io.hpp"

namespace mcenh::cli {
namespace {

struct Check {
  std::string module;
  std::string property;
  double tolerance;
  // Returns the measured deviation; the check passes when it is <= tolerance.
  std::function<double(std::mt19937_64&)> run;
};

std::vector<double> noise(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

Waveform noise_wave(std::mt19937_64& rng, std::size_t channels, std::size_t n) {
  std::vector<std::vector<double>> ch;
  for (std::size_t m = 0; m < channels; ++m) ch.push_back(noise(rng, n));
  return Waveform::from_channels(ch);
}

NetConfig small_net() {
  NetConfig cfg;
  cfg.num_bins = 33;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.channel_heads = 2;
  cfg.conv_kernel = 5;
  cfg.ff_expansion = 2;
  cfg.layers_per_block = {1, 1, 1, 1};
  cfg.reduction_after_block = 2;
  return cfg;
}

Eigen::MatrixXd permute_cols(const Eigen::MatrixXd& z, const std::vector<std::size_t>& perm) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.col(i) = z.col(perm[i]);
  return out;
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

double channel_equivariance(std::mt19937_64& rng, ChannelBlockKind kind) {
  NetConfig cfg = small_net();
  cfg.channel_block = kind;
  const MaskNet net(cfg, init_weights(cfg, rng()));
  const auto values = noise(rng, static_cast<std::size_t>(cfg.hidden) * 3);
  const Eigen::MatrixXd z = Eigen::Map<const Eigen::MatrixXd>(values.data(), cfg.hidden, 3);
  const std::vector<std::size_t> perm = {2, 0, 1};
  auto block = [&](const Eigen::MatrixXd& x) {
    return kind == ChannelBlockKind::kTac ? channel_block_tac(x, net.channel(0))
                                          : channel_block_attend(x, net.channel(0));
  };
  return max_abs(block(permute_cols(z, perm)) - permute_cols(block(z), perm));
}

std::vector<Check> checks() {
  std::vector<Check> out;
  out.push_back({"signal_core", "stft_roundtrip", 1e-9, [](std::mt19937_64& rng) {
                   double err = 0;
                   for (int i = 0; i < 3; ++i) {
                     const Waveform x = noise_wave(rng, 2, 4000 + 37 * i);
                     const Waveform y = istft(stft(x));
                     for (std::size_t k = 0; k < x.data().size(); ++k)
                       err = std::max(err, std::abs(x.data()[k] - y.data()[k]));
                   }
                   return err;
                 }});
  out.push_back({"signal_core", "convolution", 1e-9, [](std::mt19937_64& rng) {
                   const auto a = noise(rng, 300);
                   const auto b = noise(rng, 100);
                   const auto c = convolve(a, b);
                   double err = 0;
                   for (std::size_t t = 0; t < c.size(); ++t) {
                     double ref = 0;
                     for (std::size_t k = 0; k < b.size(); ++k)
                       if (t >= k && t - k < a.size()) ref += a[t - k] * b[k];
                     err = std::max(err, std::abs(ref - c[t]));
                   }
                   return err;
                 }});
  out.push_back({"features", "ipd_range", 0.0, [](std::mt19937_64& rng) {
                   const FeatureTensor z = extract_features(stft(noise_wave(rng, 3, 2000)));
                   double violation = 0;
                   for (std::size_t m = 0; m < z.num_channels(); ++m)
                     for (std::size_t n = 0; n < z.num_frames(); ++n)
                       for (std::size_t k = z.num_bins(); k < z.num_rows(); ++k) {
                         const double v = z(k, n, m);
                         if (!(v > -std::numbers::pi) || v > std::numbers::pi) violation += 1;
                       }
                   return violation;
                 }});
  out.push_back({"mask_net", "attend_equivariance", 1e-9, [](std::mt19937_64& rng) {
                   return channel_equivariance(rng, ChannelBlockKind::kAttend);
                 }});
  out.push_back({"mask_net", "tac_equivariance", 1e-9, [](std::mt19937_64& rng) {
                   return channel_equivariance(rng, ChannelBlockKind::kTac);
                 }});
  out.push_back({"mask_net", "mask_permutation_invariance", 1e-6, [](std::mt19937_64& rng) {
                   const NetConfig cfg = small_net();
                   const MaskNet net(cfg, init_weights(cfg, rng()));
                   const FeatureTensor z =
                       normalize_features(extract_features(stft(noise_wave(rng, 3, 1200), 64, 32)));
                   const std::vector<std::size_t> perm = {1, 2, 0};
                   const TFMask a = net.forward(z);
                   const TFMask b = net.forward(z.select_channels(perm));
                   double err = 0;
                   for (std::size_t i = 0; i < a.values().size(); ++i)
                     err = std::max(err, std::abs(a.values()[i] - b.values()[i]));
                   return err;
                 }});
  out.push_back({"mask_net", "channel_count_flexibility", 0.0, [](std::mt19937_64& rng) {
                   const NetConfig cfg = small_net();
                   const MaskNet net(cfg, init_weights(cfg, rng()));
                   double bad = 0;
                   for (std::size_t m = 1; m <= 4; ++m) {
                     const FeatureTensor z = normalize_features(
                         extract_features(stft(noise_wave(rng, m, 800), 64, 32)));
                     const TFMask mask = net.forward(z);
                     if (mask.num_bins() != cfg.num_bins || mask.num_frames() != z.num_frames())
                       bad += 1;
                     for (double v : mask.values())
                       if (!(v >= 0 && v <= 1)) bad += 1;
                   }
                   return bad;
                 }});
  out.push_back({"beamform", "distortionless", 1e-8, [](std::mt19937_64& rng) {
                   double err = 0;
                   for (int trial = 0; trial < 20; ++trial) {
                     const int m = 2 + trial % 4;
                     std::normal_distribution<double> dist;
                     CVector a(m);
                     CMatrix b(m, 2 * m);
                     for (int i = 0; i < m; ++i) a(i) = {dist(rng), dist(rng)};
                     for (int i = 0; i < b.size(); ++i) b.data()[i] = {dist(rng), dist(rng)};
                     const CMatrix phi_dd = a * a.adjoint();
                     const CMatrix phi_uu = b * b.adjoint() / (2.0 * m);
                     const auto r = static_cast<std::size_t>(trial % m);
                     const CVector w = mvdr_vector(phi_uu, phi_dd, r);
                     err = std::max(err, std::abs(w.dot(a) - a(r)) / std::abs(a(r)));
                   }
                   return err;
                 }});
  out.push_back({"beamform", "reference_is_argmax", 0.0, [](std::mt19937_64& rng) {
                   double bad = 0;
                   std::normal_distribution<double> dist;
                   for (int trial = 0; trial < 20; ++trial) {
                     const int m = 2 + trial % 3;
                     CMatrix s(m, m), u(m, 2 * m);
                     for (int i = 0; i < s.size(); ++i) s.data()[i] = {dist(rng), dist(rng)};
                     for (int i = 0; i < u.size(); ++i) u.data()[i] = {dist(rng), dist(rng)};
                     const CovariancePair cov{{s * s.adjoint()}, {u * u.adjoint()}};
                     std::size_t best = 0;
                     double best_snr = -1;
                     for (int r = 0; r < m; ++r) {
                       const double snr = output_snr(cov, mvdr_weights(cov, r));
                       if (snr > best_snr) {
                         best_snr = snr;
                         best = r;
                       }
                     }
                     if (select_reference(cov) != best) bad += 1;
                   }
                   return bad;
                 }});
  out.push_back({"metrics", "cisdr_filter_floor", 1e-3, [](std::mt19937_64& rng) {
                   const auto s = noise(rng, 4000);
                   const auto q = noise(rng, 40);
                   auto d = convolve(s, q);
                   d.resize(s.size());
                   return std::abs(ci_sdr(s, d) - CISDRConfig{}.sdr_max_db);
                 }});
  out.push_back({"simulate", "scene_determinism", 0.0, [](std::mt19937_64& rng) {
                   const std::uint64_t seed = rng();
                   return scene_to_text(sample_scene(ArrayKind::kCircular7, seed)) ==
                                  scene_to_text(sample_scene(ArrayKind::kCircular7, seed))
                              ? 0.0
                              : 1.0;
                 }});
  out.push_back({"simulate", "rsnr_mixing", 0.01, [](std::mt19937_64& rng) {
                   RoomScene scene;
                   scene.room_dims = {4.0, 5.0, 3.0};
                   scene.t60 = 0.15;
                   scene.source = {2.0, 3.5, 1.5};
                   scene.mics = {{2.0, 2.0, 1.5}, {2.05, 2.0, 1.5}};
                   scene.noise.diffuse_rsnr_db = 5.0;
                   scene.noise.directional.push_back({{1.0, 1.0, 1.2}, -3.0});
                   scene.seed = rng();
                   const auto clean = synth_speech(8000, scene.seed);
                   const SceneMix mix = mix_scene(Waveform::mono(clean), scene,
                                                  compute_scene_rirs(scene));
                   double err = 0;
                   for (std::size_t i = 0; i < mix.noise_components.size(); ++i) {
                     const double realized =
                         snr_db(mix.reverberant.channel(kRsnrReferenceMic),
                                mix.noise_components[i].channel(kRsnrReferenceMic));
                     err = std::max(err, std::abs(realized - mix.rsnr_targets_db[i]));
                   }
                   return err;
                 }});
  out.push_back({"weights", "container_roundtrip", 0.0, [](std::mt19937_64& rng) {
                   const NetConfig cfg = small_net();
                   const WeightStore store = init_weights(cfg, rng());
                   const fs::path tmp = fs::temp_directory_path() /
                                        fmt::format("mcenh_selftest_{:016x}.bin", rng());
                   save_weights(tmp, store);
                   const WeightStore back = load_weights(tmp);
                   fs::remove(tmp);
                   double diff = back.size() == store.size() ? 0.0 : 1.0;
                   for (const auto& [name, t] : store.tensors()) {
                     if (!back.contains(name) || back.at(name).shape != t.shape ||
                         back.at(name).data != t.data)
                       diff += 1;
                   }
                   return diff;
                 }});
  return out;
}

}  // namespace

int cmd_selftest(const JobConfig& cfg, std::ostream& log) {
  std::mt19937_64 rng(cfg.seed);
  Fnv1a hash;
  std::size_t passed = 0, failed = 0;
  auto report = [&](const std::string& module, const std::string& property, bool ok,
                    const std::string& detail) {
    (ok ? passed : failed) += 1;
    hash.update(module).update(property).update(detail);
    log << fmt::format("selftest module={} property={} status={} {}\n", module, property,
                       ok ? "pass" : "fail", detail);
  };

  for (const auto& c : checks()) {
    std::mt19937_64 local(rng());
    try {
      const double dev = c.run(local);
      report(c.module, c.property, std::isfinite(dev) && dev <= c.tolerance,
             fmt::format("deviation={:.3e} tolerance={:.1e}", dev, c.tolerance));
    } catch (const std::exception& e) {
      report(c.module, c.property, false, fmt::format("error=\"{}\"", e.what()));
    }
  }

  if (!cfg.weights.empty()) {
    try {
      const WeightStore store = load_weights(cfg.weights);
      check_weights(infer_config(store), store);
      report("weights", "manifest", true,
             fmt::format("tensors={} parameters={}", store.size(), store.parameter_count()));
    } catch (const std::exception& e) {
      report("weights", "manifest", false, fmt::format("error=\"{}\"", e.what()));
    }
  }

  log << fmt::format("selftest summary passed={} failed={} hash={:016x}\n", passed, failed,
                     hash.digest());
  return failed == 0 ? 0 : 1;
}

}  // namespace mcenh::cli
