// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/mask_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mcenh/error.hpp"
#include "mcenh/hash.hpp"

namespace mcenh {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using Shape = std::vector<std::int64_t>;

std::int64_t as_dim(std::size_t v) { return static_cast<std::int64_t>(v); }

void add_linear(std::vector<ParamSpec>& specs, const std::string& prefix,
                std::size_t out, std::size_t in, bool bias = true) {
  specs.push_back({prefix + ".weight", {as_dim(out), as_dim(in)}, in, 0.0f});
  if (bias) specs.push_back({prefix + ".bias", {as_dim(out)}, in, 0.0f});
}

void add_norm(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t dim) {
  specs.push_back({prefix + ".gamma", {as_dim(dim)}, 0, 1.0f});
  specs.push_back({prefix + ".beta", {as_dim(dim)}, 0, 0.0f});
}

void add_mhsa(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t dim) {
  for (const char* part : {"query", "key", "value", "output"})
    add_linear(specs, prefix + "." + part, dim, dim);
}

void add_feed_forward(std::vector<ParamSpec>& specs, const std::string& prefix,
                      std::size_t dim, std::size_t expansion) {
  add_norm(specs, prefix + ".norm", dim);
  add_linear(specs, prefix + ".expand", expansion * dim, dim);
  add_linear(specs, prefix + ".project", dim, expansion * dim);
}

std::string temporal_prefix(std::size_t block, std::size_t layer) {
  return fmt::format("temporal{}.layer{}", block, layer);
}

// --- conversion from float storage -----------------------------------------

MatrixXd to_matrix(const Tensor& t) {
  // Row-major storage of an out x in matrix.
  MatrixXd m(t.shape.at(0), t.shape.at(1));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = t.data[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

VectorXd to_vector(const Tensor& t) {
  VectorXd v(static_cast<Eigen::Index>(t.data.size()));
  for (std::size_t i = 0; i < t.data.size(); ++i) v(static_cast<Eigen::Index>(i)) = t.data[i];
  return v;
}

Linear load_linear(const WeightStore& w, const std::string& prefix, bool bias = true) {
  Linear l;
  l.weight = to_matrix(w.at(prefix + ".weight"));
  if (bias) l.bias = to_vector(w.at(prefix + ".bias"));
  return l;
}

LayerNormParams load_norm(const WeightStore& w, const std::string& prefix) {
  return {to_vector(w.at(prefix + ".gamma")), to_vector(w.at(prefix + ".beta"))};
}

MhsaParams load_mhsa(const WeightStore& w, const std::string& prefix, std::size_t heads) {
  MhsaParams p;
  p.query = load_linear(w, prefix + ".query");
  p.key = load_linear(w, prefix + ".key");
  p.value = load_linear(w, prefix + ".value");
  p.output = load_linear(w, prefix + ".output");
  p.heads = heads;
  return p;
}

FeedForwardParams load_feed_forward(const WeightStore& w, const std::string& prefix) {
  return {load_norm(w, prefix + ".norm"), load_linear(w, prefix + ".expand"),
          load_linear(w, prefix + ".project")};
}

ConformerLayerParams load_conformer(const WeightStore& w, const std::string& prefix,
                                    std::size_t heads) {
  ConformerLayerParams p;
  p.ff1 = load_feed_forward(w, prefix + ".ff1");
  p.attention_norm = load_norm(w, prefix + ".attention.norm");
  p.attention = load_mhsa(w, prefix + ".attention", heads);
  p.conv.norm = load_norm(w, prefix + ".conv.norm");
  p.conv.pointwise_in = load_linear(w, prefix + ".conv.pointwise_in");
  p.conv.depthwise = to_matrix(w.at(prefix + ".conv.depthwise.weight"));
  p.conv.depthwise_bias = to_vector(w.at(prefix + ".conv.depthwise.bias"));
  p.conv.conv_norm = load_norm(w, prefix + ".conv.conv_norm");
  p.conv.pointwise_out = load_linear(w, prefix + ".conv.pointwise_out");
  p.ff2 = load_feed_forward(w, prefix + ".ff2");
  p.final_norm = load_norm(w, prefix + ".final_norm");
  return p;
}

// --- activations ------------------------------------------------------------

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatrixXd swish(const MatrixXd& x) {
  return x.unaryExpr([](double v) { return v * sigmoid(v); });
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

// Row-wise softmax in place.
void softmax_rows(MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp();
    s.row(i) /= s.row(i).sum();
  }
}

VectorXd softmax(const VectorXd& v) {
  const double mx = v.maxCoeff();
  VectorXd e = (v.array() - mx).exp();
  return e / e.sum();
}

MatrixXd feed_forward(const MatrixXd& x, const FeedForwardParams& p) {
  return p.project(swish(p.expand(layer_norm(x, p.norm))));
}

MatrixXd conv_module(const MatrixXd& x, const ConvModuleParams& p) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  const MatrixXd expanded = p.pointwise_in(layer_norm(x, p.norm));
  // GLU: first half gated by the sigmoid of the second half.
  const MatrixXd gated =
      expanded.topRows(d).cwiseProduct(expanded.bottomRows(d).unaryExpr(&sigmoid));

  const Eigen::Index kernel = p.depthwise.cols();
  const Eigen::Index half = kernel / 2;
  MatrixXd conv(d, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    VectorXd acc = p.depthwise_bias;
    const Eigen::Index k_lo = std::max<Eigen::Index>(0, half - t);
    const Eigen::Index k_hi = std::min<Eigen::Index>(kernel, n - t + half);
    for (Eigen::Index k = k_lo; k < k_hi; ++k)
      acc += p.depthwise.col(k).cwiseProduct(gated.col(t + k - half));
    conv.col(t) = acc;
  }
  return p.pointwise_out(swish(layer_norm(conv, p.conv_norm)));
}

}  // namespace

// --- configuration ------------------------------------------------------------

void NetConfig::validate() const {
  if (num_bins == 0) throw Error("NetConfig: num_bins must be positive");
  if (hidden == 0 || hidden % 2 != 0) throw Error("NetConfig: hidden must be even and positive");
  if (heads == 0 || hidden % heads != 0)
    throw Error(fmt::format("NetConfig: {} heads do not divide hidden size {}", heads, hidden));
  if (channel_heads == 0 || (hidden / 2) % channel_heads != 0)
    throw Error(fmt::format("NetConfig: {} channel heads do not divide {}", channel_heads,
                            hidden / 2));
  if (conv_kernel == 0 || conv_kernel % 2 == 0)
    throw Error(fmt::format("NetConfig: conv kernel {} must be odd", conv_kernel));
  if (ff_expansion == 0) throw Error("NetConfig: ff_expansion must be positive");
  if (layers_per_block.empty()) throw Error("NetConfig: no temporal blocks");
  for (auto l : layers_per_block)
    if (l == 0) throw Error("NetConfig: every temporal block needs at least one layer");
  if (reduction_after_block < 1 || reduction_after_block >= layers_per_block.size())
    throw Error(fmt::format("NetConfig: reduction_after_block {} outside [1, {})",
                            reduction_after_block, layers_per_block.size()));
}

std::vector<ParamSpec> parameter_specs(const NetConfig& cfg) {
  cfg.validate();
  const std::size_t h = cfg.hidden;
  const std::size_t h2 = h / 2;
  std::vector<ParamSpec> specs;
  add_linear(specs, "input", h, 2 * cfg.num_bins);
  for (std::size_t b = 0; b < cfg.reduction_after_block; ++b) {
    const std::string prefix = fmt::format("channel{}", b);
    add_linear(specs, prefix + ".transform", h2, h);
    add_linear(specs, prefix + ".attend", h2, h);
    if (cfg.channel_block == ChannelBlockKind::kAttend) add_mhsa(specs, prefix + ".mhsa", h2);
  }
  if (cfg.reduction == ReductionKind::kAttend) {
    add_linear(specs, "reduction.query", h, h, false);
    add_linear(specs, "reduction.value", h, h, false);
  }
  for (std::size_t b = 0; b < cfg.num_temporal_blocks(); ++b) {
    for (std::size_t l = 0; l < cfg.layers_per_block[b]; ++l) {
      const std::string prefix = temporal_prefix(b, l);
      add_feed_forward(specs, prefix + ".ff1", h, cfg.ff_expansion);
      add_norm(specs, prefix + ".attention.norm", h);
      add_mhsa(specs, prefix + ".attention", h);
      add_norm(specs, prefix + ".conv.norm", h);
      add_linear(specs, prefix + ".conv.pointwise_in", 2 * h, h);
      specs.push_back({prefix + ".conv.depthwise.weight",
                       {as_dim(h), as_dim(cfg.conv_kernel)}, cfg.conv_kernel, 0.0f});
      specs.push_back({prefix + ".conv.depthwise.bias", {as_dim(h)}, cfg.conv_kernel, 0.0f});
      add_norm(specs, prefix + ".conv.conv_norm", h);
      add_linear(specs, prefix + ".conv.pointwise_out", h, h);
      add_feed_forward(specs, prefix + ".ff2", h, cfg.ff_expansion);
      add_norm(specs, prefix + ".final_norm", h);
    }
  }
  add_linear(specs, "output", cfg.num_bins, h);
  return specs;
}

WeightStore init_weights(const NetConfig& cfg, std::uint64_t seed) {
  WeightStore store(seed);
  for (const auto& spec : parameter_specs(cfg)) {
    Tensor t;
    t.shape = spec.shape;
    t.data.resize(t.numel());
    if (spec.fan_in == 0) {
      std::fill(t.data.begin(), t.data.end(), spec.constant);
    } else {
      const std::uint64_t key = fnv1a(spec.name);
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
      std::mt19937_64 rng(seq);
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : t.data) v = static_cast<float>(dist(rng));
    }
    store.set(spec.name, std::move(t));
  }
  return store;
}

void check_weights(const NetConfig& cfg, const WeightStore& store) {
  const auto specs = parameter_specs(cfg);
  std::set<std::string, std::less<>> expected;
  for (const auto& spec : specs) {
    expected.insert(spec.name);
    if (!store.contains(spec.name))
      throw Error(fmt::format("weight manifest: missing tensor {}", spec.name));
    const Tensor& t = store.at(spec.name);
    if (t.shape != spec.shape)
      throw Error(fmt::format("weight manifest: tensor {} has shape [{}], expected [{}]",
                              spec.name, fmt::join(t.shape, ", "), fmt::join(spec.shape, ", ")));
    for (float v : t.data)
      if (!std::isfinite(v))
        throw Error(fmt::format("weight manifest: tensor {} holds non-finite values", spec.name));
  }
  for (const auto& [name, t] : store.tensors())
    if (!expected.contains(name))
      throw Error(fmt::format("weight manifest: unexpected tensor {}", name));
}

NetConfig infer_config(const WeightStore& store, const NetConfig& defaults) {
  NetConfig cfg = defaults;
  const Tensor& input = store.at("input.weight");
  if (input.shape.size() != 2 || input.shape[1] % 2 != 0)
    throw Error("weight manifest: input.weight must be hidden x 2F");
  cfg.hidden = static_cast<std::size_t>(input.shape[0]);
  cfg.num_bins = static_cast<std::size_t>(input.shape[1] / 2);

  std::size_t channel_blocks = 0;
  while (store.contains(fmt::format("channel{}.transform.weight", channel_blocks)))
    ++channel_blocks;
  cfg.reduction_after_block = channel_blocks;
  cfg.channel_block = store.contains("channel0.mhsa.query.weight") ? ChannelBlockKind::kAttend
                                                                   : ChannelBlockKind::kTac;
  cfg.reduction =
      store.contains("reduction.query.weight") ? ReductionKind::kAttend : ReductionKind::kMean;

  cfg.layers_per_block.clear();
  for (std::size_t b = 0;; ++b) {
    std::size_t layers = 0;
    while (store.contains(temporal_prefix(b, layers) + ".ff1.expand.weight")) ++layers;
    if (layers == 0) break;
    cfg.layers_per_block.push_back(layers);
  }
  if (cfg.layers_per_block.empty()) throw Error("weight manifest: no temporal blocks found");
  const Tensor& dw = store.at(temporal_prefix(0, 0) + ".conv.depthwise.weight");
  cfg.conv_kernel = static_cast<std::size_t>(dw.shape.at(1));
  const Tensor& ff = store.at(temporal_prefix(0, 0) + ".ff1.expand.weight");
  cfg.ff_expansion = static_cast<std::size_t>(ff.shape.at(0)) / cfg.hidden;
  cfg.validate();
  return cfg;
}

// --- building blocks ----------------------------------------------------------

MatrixXd Linear::operator()(const MatrixXd& x) const {
  MatrixXd y = weight * x;
  if (bias.size() > 0) y.colwise() += bias;
  return y;
}

MatrixXd layer_norm(const MatrixXd& x, const LayerNormParams& p) {
  MatrixXd y(x.rows(), x.cols());
  const double inv_d = 1.0 / static_cast<double>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).sum() * inv_d;
    const VectorXd centred = x.col(c).array() - mean;
    const double var = centred.squaredNorm() * inv_d;
    y.col(c) = centred.cwiseProduct(p.gamma) / std::sqrt(var + kLayerNormEps) + p.beta;
  }
  return y;
}

MatrixXd multi_head_attention(const MatrixXd& x, const MhsaParams& p,
                              std::vector<MatrixXd>* attention) {
  const MatrixXd q = p.query(x);
  const MatrixXd k = p.key(x);
  const MatrixXd v = p.value(x);
  const Eigen::Index width = q.rows();
  const Eigen::Index heads = static_cast<Eigen::Index>(p.heads);
  if (heads == 0 || width % heads != 0)
    throw Error(fmt::format("attention width {} not divisible by {} heads", width, heads));
  const Eigen::Index dh = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  if (attention) attention->clear();
  MatrixXd context(width, x.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    MatrixXd scores = q.middleRows(h * dh, dh).transpose() * k.middleRows(h * dh, dh) * scale;
    softmax_rows(scores);
    context.middleRows(h * dh, dh) = v.middleRows(h * dh, dh) * scores.transpose();
    if (attention) attention->push_back(std::move(scores));
  }
  return p.output(context);
}

MatrixXd conformer_layer(const MatrixXd& x, const ConformerLayerParams& p) {
  MatrixXd y = x + 0.5 * feed_forward(x, p.ff1);
  y += multi_head_attention(layer_norm(y, p.attention_norm), p.attention);
  y += conv_module(y, p.conv);
  y += 0.5 * feed_forward(y, p.ff2);
  return layer_norm(y, p.final_norm);
}

MatrixXd temporal_block(const MatrixXd& x, const TemporalBlockParams& p) {
  if (x.cols() == 0) throw Error("temporal block needs at least one frame");
  MatrixXd y = x;
  for (const auto& layer : p.layers) y = conformer_layer(y, layer);
  return y;
}

MatrixXd channel_block_tac(const MatrixXd& z, const ChannelBlockParams& p) {
  const MatrixXd transformed = relu(p.transform(z));
  const VectorXd average = relu(p.attend(z)).rowwise().mean();
  MatrixXd out(transformed.rows() + average.size(), z.cols());
  out.topRows(transformed.rows()) = transformed;
  out.bottomRows(average.size()) = average.replicate(1, z.cols());
  return out;
}

MatrixXd channel_block_attend(const MatrixXd& z, const ChannelBlockParams& p) {
  const MatrixXd transformed = relu(p.transform(z));
  const MatrixXd attended = multi_head_attention(relu(p.attend(z)), p.mhsa);
  MatrixXd out(transformed.rows() + attended.rows(), z.cols());
  out.topRows(transformed.rows()) = transformed;
  out.bottomRows(attended.rows()) = attended;
  return out;
}

VectorXd channel_reduce_mean(const MatrixXd& z) {
  if (z.cols() == 0) throw Error("channel reduction needs at least one channel");
  return z.rowwise().mean();
}

VectorXd reduction_weights(std::span<const MatrixXd> frames, const ReductionParams& p) {
  if (frames.empty()) throw Error("channel reduction needs at least one frame");
  MatrixXd mean = MatrixXd::Zero(frames.front().rows(), frames.front().cols());
  for (const auto& z : frames) mean += z;
  mean /= static_cast<double>(frames.size());
  const MatrixXd query = p.query * mean;
  const MatrixXd value = p.value * mean;
  const VectorXd scores = value.transpose() * query.rowwise().mean();
  return softmax(scores);
}

std::vector<VectorXd> channel_reduce_attend(std::span<const MatrixXd> frames,
                                            const ReductionParams& p) {
  const VectorXd weights = reduction_weights(frames, p);
  std::vector<VectorXd> out;
  out.reserve(frames.size());
  for (const auto& z : frames) out.push_back(z * weights);
  return out;
}

// --- full network -------------------------------------------------------------

MaskNet::MaskNet(NetConfig cfg, const WeightStore& store) : cfg_(std::move(cfg)) {
  check_weights(cfg_, store);
  input_ = load_linear(store, "input");
  for (std::size_t b = 0; b < cfg_.reduction_after_block; ++b) {
    const std::string prefix = fmt::format("channel{}", b);
    ChannelBlockParams p;
    p.transform = load_linear(store, prefix + ".transform");
    p.attend = load_linear(store, prefix + ".attend");
    if (cfg_.channel_block == ChannelBlockKind::kAttend)
      p.mhsa = load_mhsa(store, prefix + ".mhsa", cfg_.channel_heads);
    channel_.push_back(std::move(p));
  }
  if (cfg_.reduction == ReductionKind::kAttend) {
    reduction_.query = to_matrix(store.at("reduction.query.weight"));
    reduction_.value = to_matrix(store.at("reduction.value.weight"));
  }
  for (std::size_t b = 0; b < cfg_.num_temporal_blocks(); ++b) {
    TemporalBlockParams block;
    for (std::size_t l = 0; l < cfg_.layers_per_block[b]; ++l)
      block.layers.push_back(load_conformer(store, temporal_prefix(b, l), cfg_.heads));
    temporal_.push_back(std::move(block));
  }
  output_ = load_linear(store, "output");
}

TFMask MaskNet::forward(const FeatureTensor& features) const {
  const std::size_t M = features.num_channels();
  const std::size_t N = features.num_frames();
  if (M == 0) throw Error("mask estimator needs at least one channel");
  if (N == 0) throw Error("mask estimator needs at least one frame");
  if (features.num_bins() != cfg_.num_bins)
    throw Error(fmt::format("feature width 2x{} does not match network input 2x{}",
                            features.num_bins(), cfg_.num_bins));
  const auto rows = static_cast<Eigen::Index>(features.num_rows());
  const auto frames = static_cast<Eigen::Index>(N);

  std::vector<MatrixXd> streams;
  streams.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    Eigen::Map<const MatrixXd> z(features.column(0, m).data(), rows, frames);
    streams.push_back(input_(z));
  }

  const auto hidden = static_cast<Eigen::Index>(cfg_.hidden);
  const auto channels = static_cast<Eigen::Index>(M);
  auto gather = [&](Eigen::Index n) {
    MatrixXd z(hidden, channels);
    for (std::size_t m = 0; m < M; ++m) z.col(static_cast<Eigen::Index>(m)) = streams[m].col(n);
    return z;
  };

  for (std::size_t b = 0; b < cfg_.reduction_after_block; ++b) {
    for (Eigen::Index n = 0; n < frames; ++n) {
      const MatrixXd z = gather(n);
      const MatrixXd mixed = cfg_.channel_block == ChannelBlockKind::kAttend
                                 ? channel_block_attend(z, channel_[b])
                                 : channel_block_tac(z, channel_[b]);
      for (std::size_t m = 0; m < M; ++m)
        streams[m].col(n) = mixed.col(static_cast<Eigen::Index>(m));
    }
    for (auto& s : streams) s = temporal_block(s, temporal_[b]);
  }

  MatrixXd x(hidden, frames);
  if (cfg_.reduction == ReductionKind::kAttend) {
    std::vector<MatrixXd> per_frame;
    per_frame.reserve(N);
    for (Eigen::Index n = 0; n < frames; ++n) per_frame.push_back(gather(n));
    const auto reduced = channel_reduce_attend(per_frame, reduction_);
    for (Eigen::Index n = 0; n < frames; ++n) x.col(n) = reduced[static_cast<std::size_t>(n)];
  } else {
    for (Eigen::Index n = 0; n < frames; ++n) x.col(n) = channel_reduce_mean(gather(n));
  }

  for (std::size_t b = cfg_.reduction_after_block; b < cfg_.num_temporal_blocks(); ++b)
    x = temporal_block(x, temporal_[b]);

  const MatrixXd logits = output_(x);
  TFMask mask(cfg_.num_bins, N);
  for (Eigen::Index n = 0; n < frames; ++n)
    for (Eigen::Index f = 0; f < logits.rows(); ++f)
      mask(static_cast<std::size_t>(f), static_cast<std::size_t>(n)) = sigmoid(logits(f, n));
  return mask;
}

TFMask mask_forward(const FeatureTensor& features, const NetConfig& cfg,
                    const WeightStore& store) {
  return MaskNet(cfg, store).forward(features);
}

}  // namespace mcenh
