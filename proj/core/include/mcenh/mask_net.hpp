// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcenh/features.hpp"
#include "mcenh/tf_mask.hpp"
#include "mcenh/weights.hpp"

namespace mcenh {

enum class ChannelBlockKind { kTac, kAttend };
enum class ReductionKind { kMean, kAttend };

// Mask-estimator topology. Temporal blocks [0, reduction_after_block) run on
// every channel stream, each preceded by a channel block; the remaining blocks
// run on the reduced single stream. The last block is followed by a linear
// map to num_bins outputs and a sigmoid.
struct NetConfig {
  std::size_t num_bins = kDefaultFrameSize / 2 + 1;
  std::size_t hidden = 128;
  std::size_t heads = 4;
  std::size_t channel_heads = 4;
  std::size_t conv_kernel = 31;
  std::size_t ff_expansion = 4;
  std::vector<std::size_t> layers_per_block = {5, 5, 5, 5, 5, 1};
  std::size_t reduction_after_block = 3;
  ChannelBlockKind channel_block = ChannelBlockKind::kAttend;
  ReductionKind reduction = ReductionKind::kAttend;

  std::size_t num_temporal_blocks() const { return layers_per_block.size(); }
  void validate() const;
};

struct ParamSpec {
  std::string name;
  std::vector<std::int64_t> shape;
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) when fan_in > 0, otherwise
  // filled with `constant`.
  std::size_t fan_in = 0;
  float constant = 0.0f;
};

// Every tensor the configuration needs, in a fixed order.
std::vector<ParamSpec> parameter_specs(const NetConfig& cfg);

// Seeded initialisation; every tensor draws from its own stream keyed by
// (seed, tensor name), so adding tensors never perturbs existing ones.
WeightStore init_weights(const NetConfig& cfg, std::uint64_t seed);

// Throws unless the store holds exactly the tensors of `cfg` with matching
// shapes and finite values.
void check_weights(const NetConfig& cfg, const WeightStore& store);

// Recovers a configuration from tensor names and shapes. Head counts are not
// stored in the container and are taken from `defaults`.
NetConfig infer_config(const WeightStore& store, const NetConfig& defaults = {});

// ---------------------------------------------------------------------------
// Building blocks. Activations are column-per-token matrices: rows are
// features, columns are frames (temporal) or channels (channel blocks).

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out, or empty

  Eigen::MatrixXd operator()(const Eigen::MatrixXd& x) const;
};

struct LayerNormParams {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
};

struct MhsaParams {
  Linear query, key, value, output;
  std::size_t heads = 1;
};

struct FeedForwardParams {
  LayerNormParams norm;
  Linear expand, project;
};

struct ConvModuleParams {
  LayerNormParams norm;
  Linear pointwise_in;        // d -> 2d, followed by GLU
  Eigen::MatrixXd depthwise;  // d x kernel
  Eigen::VectorXd depthwise_bias;
  LayerNormParams conv_norm;
  Linear pointwise_out;
};

struct ConformerLayerParams {
  FeedForwardParams ff1;
  LayerNormParams attention_norm;
  MhsaParams attention;
  ConvModuleParams conv;
  FeedForwardParams ff2;
  LayerNormParams final_norm;
};

struct TemporalBlockParams {
  std::vector<ConformerLayerParams> layers;
};

// W_C and W_A halve the width; `mhsa` is only used by the attend variant.
struct ChannelBlockParams {
  Linear transform;
  Linear attend;
  MhsaParams mhsa;
};

struct ReductionParams {
  Eigen::MatrixXd query;  // hidden x hidden
  Eigen::MatrixXd value;  // hidden x hidden
};

inline constexpr double kLayerNormEps = 1e-5;

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const LayerNormParams& p);

// Self-attention over the columns of x. If `attention` is given it receives
// one T x T row-stochastic matrix per head (row = query).
Eigen::MatrixXd multi_head_attention(const Eigen::MatrixXd& x, const MhsaParams& p,
                                     std::vector<Eigen::MatrixXd>* attention = nullptr);

Eigen::MatrixXd conformer_layer(const Eigen::MatrixXd& x, const ConformerLayerParams& p);

// x: hidden x N for one channel stream.
Eigen::MatrixXd temporal_block(const Eigen::MatrixXd& x, const TemporalBlockParams& p);

// z: hidden x M for one frame.
Eigen::MatrixXd channel_block_tac(const Eigen::MatrixXd& z, const ChannelBlockParams& p);
Eigen::MatrixXd channel_block_attend(const Eigen::MatrixXd& z, const ChannelBlockParams& p);

Eigen::VectorXd channel_reduce_mean(const Eigen::MatrixXd& z);

// Softmax channel weights shared by all frames (frames: N matrices hidden x M).
Eigen::VectorXd reduction_weights(std::span<const Eigen::MatrixXd> frames,
                                  const ReductionParams& p);
std::vector<Eigen::VectorXd> channel_reduce_attend(std::span<const Eigen::MatrixXd> frames,
                                                   const ReductionParams& p);

// Converted, validated parameters for repeated inference. Read-only after
// construction, so one instance can serve concurrent forward passes.
class MaskNet {
 public:
  MaskNet(NetConfig cfg, const WeightStore& store);

  const NetConfig& config() const { return cfg_; }

  TFMask forward(const FeatureTensor& features) const;

  const TemporalBlockParams& temporal(std::size_t block) const { return temporal_.at(block); }
  const ChannelBlockParams& channel(std::size_t block) const { return channel_.at(block); }
  const ReductionParams& reduction() const { return reduction_; }

 private:
  NetConfig cfg_;
  Linear input_;
  std::vector<ChannelBlockParams> channel_;
  std::vector<TemporalBlockParams> temporal_;
  ReductionParams reduction_;
  Linear output_;
};

TFMask mask_forward(const FeatureTensor& features, const NetConfig& cfg,
                    const WeightStore& store);

}  // namespace mcenh
