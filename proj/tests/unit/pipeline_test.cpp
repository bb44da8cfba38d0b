// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include "mcenh/error.hpp"
#include "mcenh/metrics.hpp"
#include "mcenh/pipeline.hpp"
#include "mcenh/simulate.hpp"
#include "test_util.hpp"

namespace mcenh {
namespace {

struct Simulated {
  RoomScene scene;
  SceneMix mix;
  Waveform clean;
};

Simulated simulate(std::uint64_t seed, double seconds = 2.0) {
  SceneOptions opts;
  opts.noise = NoiseMode::kDiffuseOnly;
  Simulated s;
  s.scene = sample_scene(ArrayKind::kCircular7, seed, opts);
  s.clean = Waveform::mono(synth_speech(static_cast<std::size_t>(seconds * 16000), seed));
  s.mix = mix_scene(s.clean, s.scene, compute_scene_rirs(s.scene));
  return s;
}

TEST(Enhance, OracleImprovesOverClosestMic) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Simulated s = simulate(seed);
    const std::size_t closest = s.scene.closest_mic();
    const auto ref = clean_at_mic(s.clean.channel(0), s.scene, closest);
    const double input = ci_sdr(ref, s.mix.mixture.channel(closest));

    const EnhanceResult automatic = enhance(s.mix.mixture, {}, &s.mix.early_image);
    ASSERT_EQ(automatic.output.num_channels(), 1u);
    ASSERT_EQ(automatic.output.num_samples(), s.mix.mixture.num_samples());
    EXPECT_GT(ci_sdr(ref, automatic.output.channel(0)), input) << "seed " << seed;

    EnhanceOptions fixed;
    fixed.reference = closest;
    const EnhanceResult at_closest = enhance(s.mix.mixture, fixed, &s.mix.early_image);
    EXPECT_GT(ci_sdr(ref, at_closest.output.channel(0)), input) << "seed " << seed;
  }
}

TEST(Enhance, ZeroFloorEqualsNoPostMask) {
  const Simulated s = simulate(3, 1.0);
  EnhanceOptions floor0;
  floor0.gmin_db = 0.0;
  const EnhanceResult a = enhance(s.mix.mixture, {}, &s.mix.early_image);
  const EnhanceResult b = enhance(s.mix.mixture, floor0, &s.mix.early_image);
  EXPECT_EQ(a.output.data(), b.output.data());
  EnhanceOptions floor20;
  floor20.gmin_db = -20.0;
  EXPECT_NE(enhance(s.mix.mixture, floor20, &s.mix.early_image).output.data(), a.output.data());
}

TEST(Enhance, SingleChannelFixedEqualsAuto) {
  const Simulated s = simulate(4, 1.0);
  const std::vector<std::size_t> one = {2};
  const Waveform y = s.mix.mixture.select_channels(one);
  const Waveform e = s.mix.early_image.select_channels(one);
  EnhanceOptions fixed;
  fixed.reference = 0;
  const EnhanceResult a = enhance(y, {}, &e);
  const EnhanceResult b = enhance(y, fixed, &e);
  EXPECT_EQ(a.reference, 0u);
  EXPECT_EQ(a.output.data(), b.output.data());
}

TEST(Enhance, OracleMaskChannel) {
  const Simulated s = simulate(5, 1.0);
  const EnhanceResult a = enhance(s.mix.mixture, {}, &s.mix.early_image);
  EXPECT_EQ(a.mask_channel, strongest_channel(s.mix.early_image));
  EnhanceOptions fixed;
  fixed.reference = 3;
  const EnhanceResult b = enhance(s.mix.mixture, fixed, &s.mix.early_image);
  EXPECT_EQ(b.mask_channel, 3u);
  EXPECT_EQ(b.reference, 3u);
}

TEST(Enhance, NetMaskPathRunsForAnyChannelCount) {
  NetConfig cfg;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.channel_heads = 2;
  cfg.conv_kernel = 3;
  cfg.ff_expansion = 1;
  cfg.layers_per_block = {1, 1};
  cfg.reduction_after_block = 1;
  const MaskNet net(cfg, init_weights(cfg, 1));
  const Simulated s = simulate(6, 0.5);
  EnhanceOptions opts;
  opts.mask = MaskSource::kNet;
  for (std::size_t m : {1u, 3u, 7u}) {
    std::vector<std::size_t> ch(m);
    for (std::size_t i = 0; i < m; ++i) ch[i] = i;
    const EnhanceResult r = enhance(s.mix.mixture.select_channels(ch), opts, nullptr, &net);
    EXPECT_EQ(r.output.num_samples(), s.mix.mixture.num_samples());
    EXPECT_LT(r.reference, m);
    EXPECT_NO_THROW(r.output.validate());
  }
  EXPECT_THROW(enhance(s.mix.mixture, opts), Error);
}

TEST(Enhance, InputErrors) {
  const Simulated s = simulate(7, 0.5);
  EXPECT_THROW(enhance(s.mix.mixture, {}), Error);
  EnhanceOptions bad;
  bad.reference = 7;
  EXPECT_THROW(enhance(s.mix.mixture, bad, &s.mix.early_image), Error);
  const std::vector<std::size_t> two = {0, 1};
  const Waveform e2 = s.mix.early_image.select_channels(two);
  EXPECT_THROW(enhance(s.mix.mixture, {}, &e2), Error);
}

}  // namespace
}  // namespace mcenh
