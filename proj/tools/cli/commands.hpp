// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mcenh/simulate.hpp"
#include "mcenh/wav.hpp"

namespace mcenh::cli {

namespace fs = std::filesystem;

struct JobConfig {
  // simulate
  fs::path out;
  std::size_t num_scenes = 1;
  double duration_s = 4.0;
  ArrayKind array = ArrayKind::kCircular7;
  NoiseMode noise = NoiseMode::kMixed;
  fs::path clean;  // mono WAV or directory of WAVs; empty: synthetic speech
  SampleFormat format = SampleFormat::kFloat32;

  // enhance
  fs::path input;  // WAV or directory of *_mix.wav
  fs::path early;  // oracle mode, single-file input
  std::string mask = "oracle";  // "oracle" or "net:PATH"
  std::optional<double> gmin_db;
  std::optional<std::size_t> reference;  // 0-based; unset = auto

  // evaluate
  fs::path scenes;
  fs::path estimates;
  fs::path refs_list;
  fs::path inputs_list;
  fs::path report;
  double sdr_max_db = 30.0;

  // selftest
  fs::path weights;

  // shared
  std::vector<std::size_t> channels;  // 0-based channel subset, empty = all
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// "1,7,4" (1-based, as printed on array diagrams) -> {0, 6, 3}.
std::vector<std::size_t> parse_channel_list(std::string_view text);
// "auto" -> nullopt, otherwise a 0-based channel index.
std::optional<std::size_t> parse_reference(std::string_view text);
NoiseMode parse_noise_mode(std::string_view text);

std::string scene_id(std::size_t index);

// Each writes line-oriented "key=value" records to `log` and returns a
// process exit code. Failures surface as mcenh::Error with path context.
int cmd_simulate(const JobConfig& cfg, std::ostream& log);
int cmd_enhance(const JobConfig& cfg, std::ostream& log);
int cmd_evaluate(const JobConfig& cfg, std::ostream& log);
int cmd_selftest(const JobConfig& cfg, std::ostream& log);

// Weight container utilities.
int cmd_weights_init(const JobConfig& cfg, bool tac, bool mean_reduction, std::ostream& log);
int cmd_weights_manifest(const fs::path& path, std::ostream& log);

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mcenh::cli
