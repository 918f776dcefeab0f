#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "lkcell/lk_block.hpp"
#include "lkcell/tensor.hpp"

namespace lkcell {

// Architecture hyperparameters. stage_depths/stage_channels follow the
// (N1..N4, C) table layout; num_classes counts nucleus classes only, the NT
// head emits num_classes + 1 channels (index 0 = background).
struct NetworkConfig {
  std::string name = "custom";
  std::array<int, 4> stage_depths{1, 1, 1, 1};
  std::array<int, 4> stage_channels{8, 16, 32, 64};
  int num_classes = 5;
  std::array<int, 4> stage_kernels{13, 13, 13, 13};
  std::vector<std::pair<int, int>> branches{{5, 1}, {3, 2}, {3, 3}};

  void validate() const;

  // Named variants: "toy" (1,1,1,1)/(8,16,32,64),
  // "lkcell-b" (2,2,8,2)/(64,128,256,512), "lkcell-l" (3,3,27,3)/(64,128,256,512).
  static NetworkConfig named(const std::string& name);

  bool structurally_equal(const NetworkConfig& o) const;
};

// The three output maps, all at the input's spatial resolution.
//   np_map: 2 channels (background, nucleus), softmax pair.
//   hv_map: 2 channels (horizontal, vertical signed distances), tanh range.
//   nt_map: num_classes + 1 channels (background + types), softmax.
struct SegmentationOutput {
  Tensor np_map;
  Tensor hv_map;
  Tensor nt_map;
};

using BlockVariant = std::variant<LKBlock, FusedBlock>;

Tensor block_forward(const BlockVariant& block, const Tensor& x);

struct ConvBnLayer {
  ConvParams conv;
  BatchNormParams bn;
};

struct EncoderStage {
  ConvBnLayer down;  // stride-2 3x3 + BN + GELU
  std::vector<BlockVariant> blocks;
};

// One decoder step: block on the incoming features, x2 bilinear upsample,
// concat with the skip, 1x1 projection down to the skip's width.
struct DecoderStage {
  BlockVariant block;
  ConvParams proj;
};

struct SegmentationHeads {
  ConvParams np;
  ConvParams hv;
  ConvParams nt;
};

struct Network {
  NetworkConfig config;
  bool fused = false;
  ConvBnLayer stem;  // stride-2 3x3, 3 -> C1/2
  std::array<EncoderStage, 4> stages;
  std::array<DecoderStage, 4> decoder;
  ConvParams input_skip1;  // 3x3, 3 -> C1/2, GELU after
  ConvParams input_skip2;  // 3x3, C1/2 -> C1/2
  SegmentationHeads heads;
};

// Builds the network structure and fills every tensor deterministically from
// the seed (see model_store.hpp for the generator). Same (config, seed) gives
// bitwise-identical weights regardless of construction order.
Network build_network(const NetworkConfig& config, std::uint64_t seed);

// Structure only, all tensors zero; used by the weight loader.
Network build_network_structure(const NetworkConfig& config);

// Five skip tensors: stem output at H/2, then the four stage outputs at
// H/4 .. H/32. Input must be 3-channel with H, W divisible by 32.
std::array<Tensor, 5> encoder_forward(const Network& net, const Tensor& image);

// F_prev at (h, w) meets skip Z at (2h, 2w); output spatial dims equal Z's
// and output channels equal the projection width.
Tensor decoder_stage_forward(const DecoderStage& stage, const Tensor& f_prev,
                             const Tensor& z);

SegmentationOutput forward(const Network& net, const Tensor& image);

// Replaces every block with its structurally reparameterized form.
Network reparameterize_network(const Network& net);

// One named weight tensor inside a network. Buffers (BN running stats) are
// stored and serialized but not counted as parameters.
struct ParamRef {
  std::string name;
  std::vector<int> dims;
  float* data;
  std::size_t size;
  bool is_buffer;
};

void visit_params(Network& net, const std::function<void(const ParamRef&)>& fn);
void visit_params(const Network& net,
                  const std::function<void(const std::string& name,
                                           const std::vector<int>& dims,
                                           const float* data, std::size_t size,
                                           bool is_buffer)>& fn);

// Number of parameters actually held by the network (weights, biases, BN
// gamma/beta; running stats excluded).
std::uint64_t count_params(const Network& net);

}  // namespace lkcell
