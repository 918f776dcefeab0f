#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lkcell/network.hpp"

namespace lkcell {

// Closed-form cost conventions, applied uniformly by the analyzer:
//   conv        MACs = out_elems * (in_c/groups) * kh * kw, FLOPs = 2*MACs,
//               plus out_elems when a bias is present
//   batch norm  2 FLOPs per element (scale + shift)
//   relu/gelu/tanh  1 FLOP per element
//   softmax     3 FLOPs per element
//   bilinear x2 8 FLOPs per output element (nearest: 0), concat: 0
//   skip add    1 FLOP per element
// Parameter counts cover conv weights + biases and BN gamma/beta; BN running
// stats are buffers and excluded.
struct LayerCost {
  std::string name;
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

struct CostReport {
  std::vector<LayerCost> layers;
  std::uint64_t total_params = 0;
  std::uint64_t total_flops = 0;
};

std::uint64_t conv_macs(int out_c, int in_c_per_group, int kh, int kw, int out_h,
                        int out_w, int batch = 1);

// Per-layer breakdown for a whole network at the given input size.
CostReport network_cost(const NetworkConfig& config, int height, int width,
                        bool fused);

std::uint64_t count_params(const NetworkConfig& config, bool fused = false);
std::uint64_t count_flops(const NetworkConfig& config, int height, int width,
                          bool fused = false);

}  // namespace lkcell
