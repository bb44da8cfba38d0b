// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// End-to-end acceptance gate. Each criterion prints one line:
//   acceptance <id> <name>: PASS|FAIL <measurements>
// The process exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "mcenh/beamform.hpp"
#include "mcenh/error.hpp"
#include "mcenh/features.hpp"
#include "mcenh/mask_net.hpp"
#include "mcenh/metrics.hpp"
#include "mcenh/pipeline.hpp"
#include "mcenh/signal.hpp"
#include "mcenh/simulate.hpp"
#include "mcenh/weights.hpp"

#if MCENH_HAVE_CLI
#include "commands.hpp"
#endif

namespace mcenh {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string format(const char* fmt, auto... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string out(static_cast<std::size_t>(n) + 1, '\0');
  std::snprintf(out.data(), out.size(), fmt, args...);
  out.resize(static_cast<std::size_t>(n));
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

Eigen::MatrixXcd random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXcd a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {dist(rng), dist(rng)};
  return a;
}

Eigen::MatrixXcd random_spd(std::mt19937_64& rng, Eigen::Index m) {
  const Eigen::MatrixXcd b = random_complex(rng, m, 2 * m);
  return b * b.adjoint() / static_cast<double>(2 * m);
}

std::vector<std::vector<std::size_t>> all_permutations(std::size_t m) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

Eigen::MatrixXd permute_cols(const Eigen::MatrixXd& z, const std::vector<std::size_t>& perm) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = z.col(static_cast<Eigen::Index>(perm[i]));
  return out;
}

// Gauss-Jordan inverse with partial pivoting, written out so that it shares
// nothing with the factorisation used by the library.
Eigen::MatrixXcd gauss_jordan_inverse(Eigen::MatrixXcd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd inv = Eigen::MatrixXcd::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index pivot = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    a.row(c).swap(a.row(pivot));
    inv.row(c).swap(inv.row(pivot));
    const std::complex<double> d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const std::complex<double> f = a(r, c);
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

Eigen::VectorXcd dense_mvdr(const Eigen::MatrixXcd& uu, const Eigen::MatrixXcd& dd,
                            std::size_t r) {
  Eigen::MatrixXcd loaded = uu;
  double tr = 0;
  for (Eigen::Index i = 0; i < uu.rows(); ++i) tr += uu(i, i).real();
  for (Eigen::Index i = 0; i < uu.rows(); ++i) loaded(i, i) += tr * 1e-6;
  const Eigen::MatrixXcd x = gauss_jordan_inverse(loaded) * dd;
  std::complex<double> trace = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) trace += x(i, i);
  return x.col(static_cast<Eigen::Index>(r)) / trace;
}

// ---------------------------------------------------------------------------

Outcome check_stft_roundtrip() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Waveform x = Waveform::mono(gaussian(rng, 16000));
    const Waveform y = istft(stft(x));
    if (y.num_samples() != x.num_samples()) return {false, "length changed by the round trip"};
    for (std::size_t t = 0; t < x.num_samples(); ++t)
      worst = std::max(worst, std::abs(x(0, t) - y(0, t)));
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-6 && elapsed < 5.0,
          format("max_err=%.3e (<1e-6) runtime=%.2fs (<5s)", worst, elapsed)};
}

NetConfig suite_net(ChannelBlockKind block, ReductionKind reduction) {
  NetConfig cfg;
  cfg.hidden = 32;
  cfg.heads = 4;
  cfg.channel_heads = 4;
  cfg.conv_kernel = 7;
  cfg.ff_expansion = 2;
  cfg.layers_per_block = {1, 1, 1, 1};
  cfg.reduction_after_block = 2;
  cfg.channel_block = block;
  cfg.reduction = reduction;
  return cfg;
}

FeatureTensor random_features(std::mt19937_64& rng, std::size_t channels, std::size_t samples) {
  std::vector<std::vector<double>> ch;
  for (std::size_t m = 0; m < channels; ++m) ch.push_back(gaussian(rng, samples));
  return normalize_features(extract_features(stft(Waveform::from_channels(ch))));
}

double max_abs_diff(const TFMask& a, const TFMask& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

Outcome check_permutation_suite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(202);
  double eq_attend = 0, eq_tac = 0, inv_mean = 0, inv_attend = 0, inv_mask = 0;
  std::size_t permutations = 0;
  for (auto block : {ChannelBlockKind::kAttend, ChannelBlockKind::kTac}) {
    for (auto reduction : {ReductionKind::kMean, ReductionKind::kAttend}) {
      const NetConfig cfg = suite_net(block, reduction);
      const WeightStore store = init_weights(cfg, rng());
      const MaskNet net(cfg, store);
      for (std::size_t M = 2; M <= 4; ++M) {
        const FeatureTensor features = random_features(rng, M, 4000);
        const TFMask base = net.forward(features);
        const Eigen::MatrixXd z = Eigen::Map<const Eigen::MatrixXd>(
            gaussian(rng, cfg.hidden * M).data(), static_cast<Eigen::Index>(cfg.hidden),
            static_cast<Eigen::Index>(M));
        std::vector<Eigen::MatrixXd> frames;
        for (int n = 0; n < 6; ++n) {
          const auto v = gaussian(rng, cfg.hidden * M);
          frames.push_back(Eigen::Map<const Eigen::MatrixXd>(
              v.data(), static_cast<Eigen::Index>(cfg.hidden), static_cast<Eigen::Index>(M)));
        }
        const Eigen::MatrixXd att = channel_block_attend(z, net.channel(0));
        const Eigen::MatrixXd tac = channel_block_tac(z, net.channel(0));
        const Eigen::VectorXd mean = channel_reduce_mean(z);
        const auto pooled = channel_reduce_attend(frames, net.reduction());

        for (const auto& perm : all_permutations(M)) {
          ++permutations;
          const Eigen::MatrixXd zp = permute_cols(z, perm);
          eq_attend = std::max(eq_attend, (channel_block_attend(zp, net.channel(0)) -
                                           permute_cols(att, perm)).cwiseAbs().maxCoeff());
          eq_tac = std::max(eq_tac, (channel_block_tac(zp, net.channel(0)) -
                                     permute_cols(tac, perm)).cwiseAbs().maxCoeff());
          inv_mean = std::max(inv_mean, (channel_reduce_mean(zp) - mean).cwiseAbs().maxCoeff());
          std::vector<Eigen::MatrixXd> frames_p;
          for (const auto& f : frames) frames_p.push_back(permute_cols(f, perm));
          const auto pooled_p = channel_reduce_attend(frames_p, net.reduction());
          for (std::size_t n = 0; n < pooled.size(); ++n)
            inv_attend = std::max(inv_attend, (pooled_p[n] - pooled[n]).cwiseAbs().maxCoeff());
          inv_mask = std::max(inv_mask, max_abs_diff(net.forward(features.select_channels(perm)), base));
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  const double worst = std::max({eq_attend, eq_tac, inv_mean, inv_attend, inv_mask});
  return {worst < 1e-5 && elapsed < 60.0,
          format("permutations=%zu attend_eq=%.2e tac_eq=%.2e mean_inv=%.2e attend_inv=%.2e "
                 "mask_inv=%.2e (<1e-5) runtime=%.1fs (<60s)",
                 permutations, eq_attend, eq_tac, inv_mean, inv_attend, inv_mask, elapsed)};
}

Outcome check_flexibility() {
  std::mt19937_64 rng(303);
  const NetConfig cfg;
  const WeightStore store = init_weights(cfg, 303);
  const MaskNet net(cfg, store);
  std::string shapes;
  bool ok = true;
  for (std::size_t M = 1; M <= 8; ++M) {
    const FeatureTensor features = random_features(rng, M, 8000);
    const TFMask g = net.forward(features);
    const bool shape_ok =
        g.num_bins() == features.num_bins() && g.num_frames() == features.num_frames();
    const bool range_ok = std::all_of(g.values().begin(), g.values().end(),
                                      [](double v) { return v >= 0.0 && v <= 1.0; });
    ok = ok && shape_ok && range_ok;
    shapes += format("%sM%zu:%zux%zu", M == 1 ? "" : ",", M, g.num_bins(), g.num_frames());
  }
  return {ok, format("params=%zu masks=%s", store.parameter_count(), shapes.c_str())};
}

Outcome check_mvdr_algebra() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> pick_m(1, 6);
  double distortion = 0, dense = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto M = static_cast<Eigen::Index>(pick_m(rng));
    const Eigen::VectorXcd a = random_complex(rng, M, 1);
    const Eigen::MatrixXcd uu = random_spd(rng, M);
    const auto r = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(M));
    const Eigen::VectorXcd w = mvdr_vector(uu, 1.7 * a * a.adjoint(), r);
    distortion = std::max(distortion, std::abs(w.dot(a) - a(static_cast<Eigen::Index>(r))));

    const Eigen::MatrixXcd dd = random_spd(rng, M);
    const Eigen::VectorXcd ref = dense_mvdr(uu, dd, r);
    dense = std::max(dense, (mvdr_vector(uu, dd, r) - ref).norm() / ref.norm());
  }
  return {distortion < 1e-8 && dense < 1e-10,
          format("distortionless_err=%.2e (<1e-8) dense_rel_err=%.2e (<1e-10)", distortion, dense)};
}

std::size_t brute_force_reference(const CovariancePair& cov) {
  std::size_t best = 0;
  double best_snr = -1.0;
  for (std::size_t r = 0; r < cov.num_channels(); ++r) {
    double num = 0, den = 0;
    for (std::size_t f = 0; f < cov.num_bins(); ++f) {
      const Eigen::VectorXcd w = dense_mvdr(cov.phi_uu[f], cov.phi_dd[f], r);
      num += w.dot(cov.phi_dd[f] * w).real();
      den += w.dot(cov.phi_uu[f] * w).real();
    }
    if (num / den > best_snr) {
      best_snr = num / den;
      best = r;
    }
  }
  return best;
}

Outcome check_reference_selection() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> pick_m(1, 4), pick_f(1, 16);
  int agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto M = static_cast<Eigen::Index>(pick_m(rng));
    const int F = pick_f(rng);
    CovariancePair cov;
    for (int f = 0; f < F; ++f) {
      cov.phi_dd.push_back(random_spd(rng, M));
      cov.phi_uu.push_back(random_spd(rng, M));
    }
    if (select_reference(cov) == brute_force_reference(cov)) ++agree;
  }
  return {agree == 1000, format("agreement=%d/1000 (100%%)", agree)};
}

Outcome check_cisdr_floor() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> pick_len(1, 511);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = gaussian(rng, 16000);
    const auto q = gaussian(rng, pick_len(rng));
    std::vector<double> d(s.size(), 0.0);
    for (std::size_t t = 0; t < s.size(); ++t)
      for (std::size_t k = 0; k < q.size() && k <= t; ++k) d[t] += q[k] * s[t - k];
    worst = std::max(worst, std::abs(ci_sdr(s, d) - 30.0));
  }
  return {worst < 1e-3, format("max_dev_from_30dB=%.2e dB (<1e-3)", worst)};
}

Outcome check_diffuse_coherence() {
  const double spacing = 0.05;
  const std::vector<Vec3> mics = {{0, 0, 0}, {spacing, 0, 0}};
  const int fs = 16000;
  const Waveform noise = diffuse_noise(mics, 60 * fs, 707, fs);

  // Welch cross-spectral estimate, Hann window, 50% overlap.
  const std::size_t L = 512, hop = 256;
  std::vector<double> win(L);
  for (std::size_t i = 0; i < L; ++i)
    win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / L);
  Eigen::FFT<double> fft;
  const std::size_t bins = L / 2 + 1;
  std::vector<double> s11(bins, 0), s22(bins, 0);
  std::vector<std::complex<double>> s12(bins, 0);
  std::vector<double> a(L), b(L);
  std::vector<std::complex<double>> A, B;
  for (std::size_t start = 0; start + L <= noise.num_samples(); start += hop) {
    for (std::size_t i = 0; i < L; ++i) {
      a[i] = win[i] * noise(0, start + i);
      b[i] = win[i] * noise(1, start + i);
    }
    fft.fwd(A, a);
    fft.fwd(B, b);
    for (std::size_t k = 0; k < bins; ++k) {
      s11[k] += std::norm(A[k]);
      s22[k] += std::norm(B[k]);
      s12[k] += A[k] * std::conj(B[k]);
    }
  }
  double worst = 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * fs / L;
    if (f < 100.0 || f > 7000.0) continue;
    const double x = 2.0 * std::numbers::pi * f * spacing / kSpeedOfSound;
    const double target = std::sin(x) / x;
    const double measured = s12[k].real() / std::sqrt(s11[k] * s22[k]);
    worst = std::max(worst, std::abs(measured - target));
  }
  return {worst < 0.1, format("max_coherence_err=%.4f (<0.1) over 100-7000 Hz", worst)};
}

Outcome check_oracle_enhancement() {
  const auto start = Clock::now();
  SceneOptions opts;
  opts.noise = NoiseMode::kDiffuseOnly;
  const std::size_t scenes = 50;
  double sum_in = 0, sum_out = 0;
  std::size_t improved = 0;
  for (std::size_t i = 0; i < scenes; ++i) {
    const std::uint64_t seed = 800000 + i;
    const RoomScene scene = sample_scene(ArrayKind::kCircular7, seed, opts);
    const Waveform clean = Waveform::mono(synth_speech(4 * scene.sample_rate, seed, scene.sample_rate),
                                          scene.sample_rate);
    const SceneMix mix = mix_scene(clean, scene, compute_scene_rirs(scene));
    const EnhanceResult result = enhance(mix.mixture, EnhanceOptions{}, &mix.early_image);
    const std::size_t closest = scene.closest_mic();
    const auto ref = clean_at_mic(clean.channel(0), scene, closest);
    const double in = ci_sdr(ref, mix.mixture.channel(closest));
    const double out = ci_sdr(ref, result.output.channel(0));
    sum_in += in;
    sum_out += out;
    if (out > in) ++improved;
    std::printf("acceptance 8 scene=%zu rsnr=%.1f t60=%.2f closest=%zu ref=%zu in=%.2f out=%.2f\n",
                i, *scene.noise.diffuse_rsnr_db, scene.t60, closest, result.reference, in, out);
  }
  const double elapsed = seconds_since(start);
  const double gain = (sum_out - sum_in) / scenes;
  const double share = static_cast<double>(improved) / scenes;
  return {gain >= 5.0 && share >= 0.9 && elapsed < 600.0,
          format("mean_in=%.2f mean_out=%.2f gain=%.2f dB (>=5) improved=%zu/%zu (>=90%%) "
                 "runtime=%.0fs (<600s)",
                 sum_in / scenes, sum_out / scenes, gain, improved, scenes, elapsed)};
}

Outcome check_mask_floor_identity() {
  SceneOptions opts;
  opts.noise = NoiseMode::kMixed;
  std::size_t identical = 0, cases = 0;
  const NetConfig cfg = suite_net(ChannelBlockKind::kAttend, ReductionKind::kAttend);
  const MaskNet net(cfg, init_weights(cfg, 909));
  for (std::uint64_t seed = 900; seed < 903; ++seed) {
    const RoomScene scene = sample_scene(ArrayKind::kCircular7, seed, opts);
    const Waveform clean = Waveform::mono(synth_speech(2 * scene.sample_rate, seed, scene.sample_rate),
                                          scene.sample_rate);
    const SceneMix mix = mix_scene(clean, scene, compute_scene_rirs(scene));
    for (MaskSource source : {MaskSource::kOracle, MaskSource::kNet}) {
      EnhanceOptions plain;
      plain.mask = source;
      EnhanceOptions floored = plain;
      floored.gmin_db = 0.0;
      const auto a = enhance(mix.mixture, plain, &mix.early_image, &net).output;
      const auto b = enhance(mix.mixture, floored, &mix.early_image, &net).output;
      ++cases;
      if (a.data().size() == b.data().size() &&
          std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(double)) == 0)
        ++identical;
    }
  }
  return {identical == cases, format("bit_identical=%zu/%zu", identical, cases)};
}

Outcome check_rsnr_mixing() {
  SceneOptions opts;
  opts.noise = NoiseMode::kMixed;
  double worst = 0;
  std::size_t components = 0;
  for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
    const RoomScene scene = sample_scene(ArrayKind::kCircular7, seed, opts);
    const Waveform clean = Waveform::mono(synth_speech(scene.sample_rate, seed, scene.sample_rate),
                                          scene.sample_rate);
    const SceneMix mix = mix_scene(clean, scene, compute_scene_rirs(scene));
    for (std::size_t c = 0; c < mix.noise_components.size(); ++c) {
      const double realized = snr_db(mix.reverberant.channel(kRsnrReferenceMic),
                                     mix.noise_components[c].channel(kRsnrReferenceMic));
      worst = std::max(worst, std::abs(realized - mix.rsnr_targets_db[c]));
      ++components;
    }
  }
  return {worst < 0.01 && components > 0,
          format("components=%zu max_err=%.2e dB (<0.01)", components, worst)};
}

#if MCENH_HAVE_CLI
std::vector<std::pair<std::string, std::string>> wav_bytes(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".wav") continue;
    std::ifstream in(e.path(), std::ios::binary);
    out.emplace_back(e.path().filename().string(),
                     std::string(std::istreambuf_iterator<char>(in), {}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome check_determinism() {
  const fs::path root = fs::temp_directory_path() /
                        format("mcenh_acceptance_%llu", static_cast<unsigned long long>(
                                                            Clock::now().time_since_epoch().count()));
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path sim = root / format("run%d", run) / "sim";
    const fs::path enh = root / format("run%d", run) / "enh";
    std::ostringstream log;
    cli::JobConfig s;
    s.out = sim;
    s.num_scenes = 3;
    s.duration_s = 2.0;
    s.seed = 11;
    cli::cmd_simulate(s, log);
    cli::JobConfig e;
    e.input = sim;
    e.out = enh;
    e.gmin_db = -10.0;
    cli::cmd_enhance(e, log);
    auto files = wav_bytes(sim);
    auto enhanced = wav_bytes(enh);
    files.insert(files.end(), enhanced.begin(), enhanced.end());
    runs.push_back(std::move(files));
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  const bool same = runs[0] == runs[1] && !runs[0].empty();
  return {same, format("wav_files=%zu byte_identical=%s", runs[0].size(), same ? "yes" : "no")};
}
#else
Outcome check_determinism() { return {false, "built without the command-line tools"}; }
#endif

}  // namespace
}  // namespace mcenh

int main() {
  using namespace mcenh;
  const std::vector<Criterion> criteria = {
      {1, "stft_roundtrip", check_stft_roundtrip},
      {2, "permutation_suite", check_permutation_suite},
      {3, "channel_count_flexibility", check_flexibility},
      {4, "mvdr_algebra", check_mvdr_algebra},
      {5, "reference_selection", check_reference_selection},
      {6, "cisdr_floor", check_cisdr_floor},
      {7, "diffuse_coherence", check_diffuse_coherence},
      {8, "oracle_enhancement", check_oracle_enhancement},
      {9, "mask_floor_identity", check_mask_floor_identity},
      {10, "rsnr_mixing", check_rsnr_mixing},
      {11, "determinism", check_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("acceptance %d %s: %s %s\n", c.id, c.name.c_str(), outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance summary: %zu passed, %d failed\n", criteria.size() - failed, failed);
  return failed == 0 ? 0 : 1;
}
