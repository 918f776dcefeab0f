#pragma once

#include <cstdint>
#include <string>

#include "lkcell/network.hpp"

namespace lkcell {

// Deterministic, name-keyed weight initialization. Each tensor draws from its
// own splitmix64 stream seeded with
//     stream_seed = seed XOR fnv1a64(tensor_name)
// and consumed element by element; a uint64 draw x maps to the unit interval
// as (x >> 40) / 2^24. Rules by tensor-name suffix:
//   .weight  uniform in [-b, b), b = sqrt(3 / fan_in),
//            fan_in = (in_channels/groups) * kernel_h * kernel_w
//   .bias    zero
//   .gamma   uniform in [0.9, 1.1)       .beta  uniform in [-0.1, 0.1)
//   .mean    uniform in [-0.1, 0.1)      .var   uniform in [0.9, 1.1)
// Because streams are keyed by name, construction/traversal order is
// irrelevant to the resulting values.
void seeded_init(Network& net, std::uint64_t seed);

// .lkcw weight file, little-endian throughout:
//   magic "LKCW" | u32 version (=1) | u32 len + variant name bytes
//   u32 len + config echo (JSON: depths, channels, classes, kernels,
//                          branches, fused flag)
//   u64 tensor count, then per tensor:
//     u32 len + name | u32 ndims | u64 dims[ndims] | u32 dtype (0 = f32)
//     u64 payload byte offset | u64 payload byte length
//   payload: raw f32 arrays at the recorded offsets (relative to payload
//   start), non-overlapping and in file order.
// save/load round-trips bitwise.
void save_network(const Network& net, const std::string& path);

// Builds the network from `config` and fills it from the file. Every tensor
// in the built graph must appear in the file with matching dims, and vice
// versa; the first offending tensor is named in the error. Throws
// FormatError for bad magic/version, ConfigError for graph mismatches,
// IoError for unreadable/truncated files.
Network load_network(const std::string& path, const NetworkConfig& config);

}  // namespace lkcell
