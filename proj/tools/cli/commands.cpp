// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "mcenh/error.hpp"
#include "mcenh/mask_net.hpp"
#include "mcenh/metrics.hpp"
#include "mcenh/pipeline.hpp"
#include "mcenh/scene_io.hpp"

namespace mcenh::cli {
namespace {

using nlohmann::json;

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '{' && c != '}') {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::size_t parse_index(const std::string& s, std::string_view what) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw Error(fmt::format("invalid {} '{}'", what, s));
  }
  if (pos != s.size() || v < 0) throw Error(fmt::format("invalid {} '{}'", what, s));
  return static_cast<std::size_t>(v);
}

std::vector<fs::path> list_files(const fs::path& dir, std::string_view suffix) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("{}: not a directory", dir.string()));
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > suffix.size() && name.ends_with(suffix))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string strip_suffix(const fs::path& p, std::string_view suffix) {
  std::string name = p.filename().string();
  return name.substr(0, name.size() - suffix.size());
}

Waveform select(const Waveform& w, const std::vector<std::size_t>& channels) {
  if (channels.empty()) return w;
  for (auto c : channels)
    if (c >= w.num_channels())
      throw Error(fmt::format("channel {} out of range for a {}-channel recording", c + 1,
                              w.num_channels()));
  return w.select_channels(channels);
}

std::string condition_label(const RoomScene& scene) {
  std::string noise = "clean";
  if (scene.noise.diffuse_rsnr_db)
    noise = scene.noise.directional.empty() ? "diffuse" : "mixed";
  else if (!scene.noise.directional.empty())
    noise = "directional";
  return fmt::format("{}/{}ch/{}", to_string(scene.array_kind), scene.mics.size(), noise);
}

std::vector<fs::path> clean_sources(const fs::path& clean) {
  if (clean.empty()) return {};
  if (fs::is_directory(clean)) {
    auto files = list_files(clean, ".wav");
    if (files.empty()) throw Error(fmt::format("{}: no .wav files", clean.string()));
    return files;
  }
  return {clean};
}

struct UttRow {
  std::string id;
  fs::path path;
  std::size_t channel = 0;
};

std::vector<UttRow> read_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("{}: cannot open list", path.string()));
  std::vector<UttRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    UttRow row;
    std::string file;
    if (!(ss >> row.id >> file))
      throw Error(fmt::format("{}:{}: expected '<id> <wav> [channel]'", path.string(), lineno));
    row.path = fs::path(file).is_absolute() ? fs::path(file) : path.parent_path() / file;
    std::string ch;
    if (ss >> ch) row.channel = parse_index(ch, "channel");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> channel_of(const UttRow& row) {
  const Waveform w = read_wav(row.path);
  auto c = w.channel(row.channel);
  return {c.begin(), c.end()};
}

}  // namespace

std::vector<std::size_t> parse_channel_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    const std::size_t c = parse_index(part, "channel");
    if (c == 0) throw Error("channel numbers are 1-based");
    out.push_back(c - 1);
  }
  return out;
}

std::optional<std::size_t> parse_reference(std::string_view text) {
  if (text == "auto") return std::nullopt;
  std::string s(text);
  if (s.starts_with("fixed:")) s = s.substr(6);
  return parse_index(s, "reference");
}

NoiseMode parse_noise_mode(std::string_view text) {
  if (text == "mixed") return NoiseMode::kMixed;
  if (text == "diffuse") return NoiseMode::kDiffuseOnly;
  if (text == "none") return NoiseMode::kNone;
  throw Error(fmt::format("unknown noise mode '{}' (mixed|diffuse|none)", text));
}

std::string scene_id(std::size_t index) { return fmt::format("scene{:04d}", index); }

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int cmd_simulate(const JobConfig& cfg, std::ostream& log) {
  if (cfg.out.empty()) throw Error("simulate: --out is required");
  if (cfg.num_scenes == 0) throw Error("simulate: --num must be positive");
  if (!(cfg.duration_s > 0)) throw Error("simulate: --duration must be positive");
  fs::create_directories(cfg.out);
  const auto sources = clean_sources(cfg.clean);
  SceneOptions opts;
  opts.noise = cfg.noise;

  std::vector<std::string> lines(cfg.num_scenes);
  parallel_for(cfg.num_scenes, cfg.workers, [&](std::size_t i) {
    const std::string id = scene_id(i);
    const std::uint64_t seed = cfg.seed * 100000 + i;
    RoomScene scene = sample_scene(cfg.array, seed, opts);
    if (!cfg.channels.empty()) scene = scene.select_mics(cfg.channels);

    Waveform clean;
    if (sources.empty()) {
      const auto n = static_cast<std::size_t>(cfg.duration_s * scene.sample_rate);
      clean = Waveform::mono(synth_speech(n, seed, scene.sample_rate), scene.sample_rate);
    } else {
      const Waveform src = read_wav(sources[i % sources.size()], scene.sample_rate);
      clean = src.num_channels() == 1 ? src : src.select_channels(std::vector<std::size_t>{0});
    }

    const SceneRirs rirs = compute_scene_rirs(scene);
    const SceneMix mix = mix_scene(clean, scene, rirs);
    write_wav(cfg.out / (id + "_mix.wav"), mix.mixture, cfg.format);
    write_wav(cfg.out / (id + "_early.wav"), mix.early_image, cfg.format);
    write_wav(cfg.out / (id + "_clean.wav"), clean, cfg.format);
    write_scene_file(cfg.out / (id + "_scene.json"), scene);
    lines[i] = fmt::format("simulate utt={} condition={} channels={} samples={} t60={:.3f} closest={}",
                           id, condition_label(scene), scene.mics.size(), clean.num_samples(),
                           scene.t60, scene.closest_mic());
  });
  for (const auto& l : lines) log << l << '\n';
  return 0;
}

int cmd_enhance(const JobConfig& cfg, std::ostream& log) {
  if (cfg.input.empty() || cfg.out.empty()) throw Error("enhance: --in and --out are required");

  EnhanceOptions opts;
  opts.gmin_db = cfg.gmin_db;
  opts.reference = cfg.reference;
  std::unique_ptr<MaskNet> net;
  if (cfg.mask == "oracle") {
    opts.mask = MaskSource::kOracle;
  } else if (cfg.mask.starts_with("net:")) {
    opts.mask = MaskSource::kNet;
    const fs::path path = cfg.mask.substr(4);
    try {
      const WeightStore store = load_weights(path);
      net = std::make_unique<MaskNet>(infer_config(store), store);
    } catch (const Error& e) {
      throw Error(fmt::format("{}: malformed mask-net weights: {}", path.string(), e.what()));
    }
  } else {
    throw Error(fmt::format("unknown mask source '{}' (oracle|net:PATH)", cfg.mask));
  }

  struct Job {
    std::string id;
    fs::path mix, early, out, sidecar;
  };
  std::vector<Job> jobs;
  if (fs::is_directory(cfg.input)) {
    fs::create_directories(cfg.out);
    for (const auto& p : list_files(cfg.input, "_mix.wav")) {
      const std::string id = strip_suffix(p, "_mix.wav");
      jobs.push_back({id, p, cfg.input / (id + "_early.wav"), cfg.out / (id + "_enh.wav"),
                      cfg.out / (id + "_enh.json")});
    }
    if (jobs.empty()) throw Error(fmt::format("{}: no *_mix.wav files", cfg.input.string()));
  } else {
    fs::path sidecar = cfg.out;
    sidecar.replace_extension(".json");
    jobs.push_back({cfg.input.stem().string(), cfg.input, cfg.early, cfg.out, sidecar});
  }

  std::vector<std::string> lines(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const Waveform mixture = select(read_wav(job.mix), cfg.channels);
    Waveform early;
    if (opts.mask == MaskSource::kOracle) {
      if (job.early.empty() || !fs::exists(job.early))
        throw Error(fmt::format("{}: oracle mask needs the early image (missing {})",
                                job.mix.string(), job.early.empty() ? "--early" : job.early.string()));
      early = select(read_wav(job.early), cfg.channels);
    }
    const EnhanceResult r = enhance(mixture, opts, opts.mask == MaskSource::kOracle ? &early : nullptr,
                                    net.get());
    write_wav(job.out, r.output, cfg.format);
    json meta = {{"id", job.id},
                 {"reference", r.reference},
                 {"reference_mode", cfg.reference ? "fixed" : "auto"},
                 {"mask", cfg.mask.starts_with("net:") ? "net" : "oracle"},
                 {"channels", mixture.num_channels()}};
    meta["gmin_db"] = cfg.gmin_db ? json(*cfg.gmin_db) : json(nullptr);
    std::ofstream(job.sidecar) << meta.dump(2) << '\n';
    lines[i] = fmt::format("enhance utt={} channels={} ref={} mask={} gmin_db={}", job.id,
                           mixture.num_channels(), r.reference, meta["mask"].get<std::string>(),
                           cfg.gmin_db ? fmt::format("{}", *cfg.gmin_db) : "off");
  });
  for (const auto& l : lines) log << l << '\n';
  return 0;
}

int cmd_evaluate(const JobConfig& cfg, std::ostream& log) {
  CISDRConfig metric;
  metric.sdr_max_db = cfg.sdr_max_db;

  struct Row {
    std::string id, condition;
    UttRow ref, est;
    std::optional<UttRow> input;
    std::optional<std::size_t> reference;
    std::optional<RoomScene> scene;  // directory mode: reference is the delayed dry source
  };
  std::vector<Row> rows;

  if (!cfg.scenes.empty()) {
    if (cfg.estimates.empty()) throw Error("evaluate: --est is required with --scenes");
    for (const auto& p : list_files(cfg.scenes, "_scene.json")) {
      const std::string id = strip_suffix(p, "_scene.json");
      const RoomScene scene = read_scene_file(p);
      const std::size_t closest = scene.closest_mic();
      Row row;
      row.id = id;
      row.condition = condition_label(scene);
      row.ref = {id, cfg.scenes / (id + "_clean.wav"), 0};
      row.scene = scene;
      row.input = UttRow{id, cfg.scenes / (id + "_mix.wav"), closest};
      row.est = {id, cfg.estimates / (id + "_enh.wav"), 0};
      const fs::path sidecar = cfg.estimates / (id + "_enh.json");
      if (fs::exists(sidecar)) {
        std::ifstream in(sidecar);
        row.reference = json::parse(in).at("reference").get<std::size_t>();
      }
      if (!fs::exists(row.est.path))
        throw Error(fmt::format("evaluate: missing estimate {}", row.est.path.string()));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(fmt::format("{}: no *_scene.json files", cfg.scenes.string()));
  } else {
    if (cfg.refs_list.empty() || cfg.estimates.empty())
      throw Error("evaluate: need --scenes DIR --est DIR, or --refs LIST --est LIST");
    const auto refs = read_list(cfg.refs_list);
    const auto ests = read_list(cfg.estimates);
    std::vector<UttRow> inputs;
    if (!cfg.inputs_list.empty()) inputs = read_list(cfg.inputs_list);
    if (refs.size() != ests.size() || (!inputs.empty() && inputs.size() != refs.size()))
      throw Error(fmt::format("evaluate: list lengths differ ({} references, {} estimates)",
                              refs.size(), ests.size()));
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (refs[i].id != ests[i].id || (!inputs.empty() && inputs[i].id != refs[i].id))
        throw Error(fmt::format("evaluate: utterance id mismatch at row {}: '{}' vs '{}'", i + 1,
                                refs[i].id, ests[i].id));
      Row row;
      row.id = refs[i].id;
      row.condition = "-";
      row.ref = refs[i];
      row.est = ests[i];
      if (!inputs.empty()) row.input = inputs[i];
      rows.push_back(std::move(row));
    }
  }

  struct Result {
    std::optional<double> in_cisdr;
    double out_cisdr = 0, out_snr = 0;
  };
  std::vector<Result> results(rows.size());
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const Row& row = rows[i];
    const auto s = row.scene ? clean_at_mic(channel_of(row.ref), *row.scene, row.input->channel)
                             : channel_of(row.ref);
    const auto d = channel_of(row.est);
    if (s.size() != d.size())
      throw Error(fmt::format("evaluate: {} has {} reference samples but {} estimate samples",
                              row.id, s.size(), d.size()));
    results[i].out_cisdr = ci_sdr(s, d, metric);
    std::vector<double> err(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) err[t] = d[t] - s[t];
    results[i].out_snr = energy(err) > 0 ? snr_db(s, err) : metric.sdr_max_db;
    if (row.input) {
      const auto x = channel_of(*row.input);
      if (x.size() != s.size())
        throw Error(fmt::format("evaluate: {} input length differs from reference", row.id));
      results[i].in_cisdr = ci_sdr(s, x, metric);
    }
  });

  auto fmt_opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.4f}", *v) : std::string("-");
  };
  json report = json::array();
  double sum_in = 0, sum_out = 0, sum_snr = 0;
  std::size_t n_in = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = results[i];
    log << fmt::format("utt={} condition={} in_cisdr={} out_cisdr={:.4f} out_snr={:.4f} ref={}\n",
                       rows[i].id, rows[i].condition, fmt_opt(r.in_cisdr), r.out_cisdr, r.out_snr,
                       rows[i].reference ? std::to_string(*rows[i].reference) : "-");
    sum_out += r.out_cisdr;
    sum_snr += r.out_snr;
    if (r.in_cisdr) {
      sum_in += *r.in_cisdr;
      ++n_in;
    }
    json j = {{"id", rows[i].id}, {"condition", rows[i].condition}, {"out_cisdr", r.out_cisdr},
              {"out_snr", r.out_snr}};
    j["in_cisdr"] = r.in_cisdr ? json(*r.in_cisdr) : json(nullptr);
    j["reference"] = rows[i].reference ? json(*rows[i].reference) : json(nullptr);
    report.push_back(j);
  }
  const double n = static_cast<double>(rows.size());
  const std::optional<double> mean_in =
      n_in == rows.size() ? std::optional<double>(sum_in / n) : std::nullopt;
  log << fmt::format("mean n={} in_cisdr={} out_cisdr={:.4f} out_snr={:.4f}\n", rows.size(),
                     fmt_opt(mean_in), sum_out / n, sum_snr / n);

  if (!cfg.report.empty()) {
    json doc = {{"utterances", report},
                {"mean", {{"out_cisdr", sum_out / n}, {"out_snr", sum_snr / n}}},
                {"sdr_max_db", cfg.sdr_max_db}};
    doc["mean"]["in_cisdr"] = mean_in ? json(*mean_in) : json(nullptr);
    std::ofstream out(cfg.report);
    if (!out) throw Error(fmt::format("{}: cannot open for writing", cfg.report.string()));
    out << doc.dump(2) << '\n';
  }
  return 0;
}

int cmd_weights_init(const JobConfig& cfg, bool tac, bool mean_reduction, std::ostream& log) {
  if (cfg.out.empty()) throw Error("weights init: --out is required");
  NetConfig net;
  if (tac) net.channel_block = ChannelBlockKind::kTac;
  if (mean_reduction) net.reduction = ReductionKind::kMean;
  const WeightStore store = init_weights(net, cfg.seed);
  save_weights(cfg.out, store);
  log << fmt::format("weights out={} tensors={} parameters={} seed={}\n", cfg.out.string(),
                     store.size(), store.parameter_count(), cfg.seed);
  return 0;
}

int cmd_weights_manifest(const fs::path& path, std::ostream& log) {
  const WeightStore store = load_weights(path);
  for (const auto& e : manifest(store)) {
    std::string dims;
    for (std::size_t i = 0; i < e.shape.size(); ++i)
      dims += (i ? "x" : "") + std::to_string(e.shape[i]);
    log << fmt::format("tensor name={} shape={}\n", e.name, dims);
  }
  const NetConfig cfg = infer_config(store);
  check_weights(cfg, store);
  log << fmt::format("manifest tensors={} parameters={} status=ok\n", store.size(),
                     store.parameter_count());
  return 0;
}

}  // namespace mcenh::cli
