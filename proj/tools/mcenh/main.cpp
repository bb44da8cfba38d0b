// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mcenh/error.hpp"

namespace {

using mcenh::cli::JobConfig;

struct RawFlags {
  std::string array = "circular7";
  std::string channels;
  std::string noise = "mixed";
  std::string format = "float32";
  std::string reference = "auto";
};

void add_shared(CLI::App* cmd, JobConfig& cfg, RawFlags& raw) {
  cmd->add_option("--seed", cfg.seed, "Base RNG seed")->capture_default_str();
  cmd->add_option("--channels", raw.channels, "1-based channel subset, e.g. 1,7,4");
  cmd->add_option("--workers", cfg.workers, "Utterance-level worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel mask-based MVDR speech enhancement"};
  app.set_config("--config", "", "INI or TOML file with option defaults; flags override it");
  app.require_subcommand(1);

  JobConfig cfg;
  RawFlags raw;
  bool tac = false, mean_reduction = false;
  std::string manifest_path;

  auto* simulate = app.add_subcommand("simulate", "Generate simulated multichannel scenes");
  add_shared(simulate, cfg, raw);
  simulate->add_option("--out", cfg.out, "Output directory")->required();
  simulate->add_option("--num", cfg.num_scenes, "Number of scenes")->capture_default_str();
  simulate->add_option("--duration", cfg.duration_s, "Utterance length in seconds")
      ->capture_default_str();
  simulate->add_option("--array", raw.array, "circular7 | rectangular6 | random")
      ->capture_default_str();
  simulate->add_option("--noise", raw.noise, "mixed | diffuse | none")->capture_default_str();
  simulate->add_option("--clean", cfg.clean, "Clean mono WAV or directory of WAVs");
  simulate->add_option("--format", raw.format, "float32 | pcm16")->capture_default_str();

  auto* enhance = app.add_subcommand("enhance", "Enhance multichannel recordings");
  add_shared(enhance, cfg, raw);
  enhance->add_option("--in", cfg.input, "Mixture WAV or directory of *_mix.wav")->required();
  enhance->add_option("--out", cfg.out, "Output WAV, or directory for directory input")
      ->required();
  enhance->add_option("--early", cfg.early, "Early-image WAV for oracle masks (single file)");
  enhance->add_option("--mask", cfg.mask, "oracle | net:PATH")->capture_default_str();
  enhance->add_option("--gmin-db", cfg.gmin_db, "Post-mask floor in dB (<= 0)");
  enhance->add_option("--ref", raw.reference, "auto | INDEX (0-based)")->capture_default_str();
  enhance->add_option("--format", raw.format, "float32 | pcm16")->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Score enhanced signals with CI-SDR and SNR");
  add_shared(evaluate, cfg, raw);
  evaluate->add_option("--scenes", cfg.scenes, "Directory written by simulate");
  evaluate->add_option("--est", cfg.estimates, "Estimate directory or utterance list");
  evaluate->add_option("--refs", cfg.refs_list, "Reference utterance list");
  evaluate->add_option("--inputs", cfg.inputs_list, "Unprocessed input utterance list");
  evaluate->add_option("--report", cfg.report, "JSON report path");
  evaluate->add_option("--sdr-max-db", cfg.sdr_max_db, "CI-SDR upper bound")
      ->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run reduced invariant checks");
  selftest->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  selftest->add_option("--weights", cfg.weights, "Weight file to validate");

  auto* weights = app.add_subcommand("weights", "Mask-net weight container utilities");
  weights->require_subcommand(1);
  auto* init = weights->add_subcommand("init", "Write seeded initial weights");
  init->add_option("--out", cfg.out, "Output weight file")->required();
  init->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  init->add_flag("--tac", tac, "Use transform-average-concatenate channel blocks");
  init->add_flag("--mean-reduction", mean_reduction, "Use mean channel reduction");
  auto* show = weights->add_subcommand("manifest", "List and validate a weight file");
  show->add_option("path", manifest_path, "Weight file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.array = mcenh::parse_array_kind(raw.array);
    cfg.channels = mcenh::cli::parse_channel_list(raw.channels);
    cfg.noise = mcenh::cli::parse_noise_mode(raw.noise);
    cfg.reference = mcenh::cli::parse_reference(raw.reference);
    if (raw.format == "float32")
      cfg.format = mcenh::SampleFormat::kFloat32;
    else if (raw.format == "pcm16")
      cfg.format = mcenh::SampleFormat::kPcm16;
    else
      throw mcenh::Error("unknown --format '" + raw.format + "' (float32|pcm16)");

    if (simulate->parsed()) return mcenh::cli::cmd_simulate(cfg, std::cout);
    if (enhance->parsed()) return mcenh::cli::cmd_enhance(cfg, std::cout);
    if (evaluate->parsed()) return mcenh::cli::cmd_evaluate(cfg, std::cout);
    if (selftest->parsed()) return mcenh::cli::cmd_selftest(cfg, std::cout);
    if (init->parsed()) return mcenh::cli::cmd_weights_init(cfg, tac, mean_reduction, std::cout);
    if (show->parsed()) return mcenh::cli::cmd_weights_manifest(manifest_path, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
