#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lkcell {

// splitmix64 (Vigna). Every weight tensor gets its own stream so that the
// initialization of one tensor never depends on how many tensors were filled
// before it.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 24 bits of mantissa, reproducible across platforms.
  double next_unit() {
    return static_cast<double>(next() >> 40) * (1.0 / 16777216.0);
  }

  // Uniform in [-bound, bound).
  double next_symmetric(double bound) { return (2.0 * next_unit() - 1.0) * bound; }
};

// FNV-1a 64-bit hash, used to key per-tensor streams by tensor name.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream for a named tensor under a global seed.
inline SplitMix64 tensor_stream(std::uint64_t seed, std::string_view name) {
  return SplitMix64(seed ^ fnv1a64(name));
}

}  // namespace lkcell
