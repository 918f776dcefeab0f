#include "lkcell/lk_block.hpp"

#include <string>

#include "lkcell/activations.hpp"
#include "lkcell/resample.hpp"

namespace lkcell {

std::pair<int, int> dw_kernel_footprint(int dilation) {
  if (dilation < 1) {
    throw DomainError("dw_kernel_footprint: dilation must be >= 1, got " +
                      std::to_string(dilation));
  }
  const int side = 2 * dilation - 1;
  return {side, side};
}

std::uint64_t reparam_footprint(int dilation, int num_kernels, int small_kernel) {
  if (dilation < 1 || num_kernels < 1 || small_kernel < 1) {
    throw DomainError("reparam_footprint: all arguments must be >= 1");
  }
  const std::uint64_t side = 2ULL * dilation - 1;
  return side * side * static_cast<std::uint64_t>(num_kernels) *
         static_cast<std::uint64_t>(small_kernel) * small_kernel;
}

template <typename T>
std::vector<T> dilated_to_dense_kernel(const std::vector<T>& kernel, int k, int r,
                                       int K) {
  if (k < 1 || r < 1 || K < 1 || k % 2 == 0 || K % 2 == 0) {
    throw ConfigError("dilated_to_dense_kernel: k and K must be odd positives");
  }
  if ((k - 1) * r + 1 > K) {
    throw ConfigError("dilated_to_dense_kernel: extent (k-1)*r+1 = " +
                      std::to_string((k - 1) * r + 1) + " exceeds K = " +
                      std::to_string(K));
  }
  if (kernel.size() != static_cast<std::size_t>(k) * k) {
    throw ConfigError("dilated_to_dense_kernel: kernel has " +
                      std::to_string(kernel.size()) + " taps, expected " +
                      std::to_string(k * k));
  }
  std::vector<T> dense(static_cast<std::size_t>(K) * K, T(0));
  const int offset = (K - 1) / 2 - r * (k - 1) / 2;
  for (int y = 0; y < k; ++y) {
    for (int x = 0; x < k; ++x) {
      dense[static_cast<std::size_t>(offset + y * r) * K + (offset + x * r)] =
          kernel[static_cast<std::size_t>(y) * k + x];
    }
  }
  return dense;
}

void LKBlockConfig::validate() const {
  if (channels < 1) {
    throw ConfigError("lk_block: channels must be >= 1, got " +
                      std::to_string(channels));
  }
  if (large_kernel < 1 || large_kernel % 2 == 0) {
    throw ConfigError("lk_block: large kernel must be odd, got " +
                      std::to_string(large_kernel));
  }
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto [k, r] = branches[i];
    if (k < 1 || k % 2 == 0) {
      throw ConfigError("lk_block: branch " + std::to_string(i) +
                        " kernel must be odd, got " + std::to_string(k));
    }
    if (r < 1) {
      throw ConfigError("lk_block: branch " + std::to_string(i) +
                        " dilation must be >= 1, got " + std::to_string(r));
    }
    if ((k - 1) * r + 1 > large_kernel) {
      throw ConfigError("lk_block: branch " + std::to_string(i) + " extent (" +
                        std::to_string(k) + "-1)*" + std::to_string(r) +
                        "+1 exceeds large kernel " + std::to_string(large_kernel));
    }
  }
}

template <typename T>
void LKBlockT<T>::validate() const {
  config.validate();
  if (!large_conv.is_depthwise() || large_conv.in_channels != config.channels) {
    throw ConfigError("lk_block: large conv must be depthwise over " +
                      std::to_string(config.channels) + " channels");
  }
  if (large_conv.kernel_h != config.large_kernel ||
      large_conv.kernel_w != config.large_kernel) {
    throw ConfigError("lk_block: large conv kernel disagrees with config");
  }
  if (branches.size() != config.branches.size()) {
    throw ConfigError("lk_block: branch count disagrees with config");
  }
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& br = branches[i];
    if (!br.conv.is_depthwise() || br.conv.in_channels != config.channels) {
      throw ConfigError("lk_block: branch " + std::to_string(i) +
                        " conv must be depthwise over block channels");
    }
    if (br.kernel_size != config.branches[i].first ||
        br.dilation != config.branches[i].second) {
      throw ConfigError("lk_block: branch " + std::to_string(i) +
                        " geometry disagrees with config");
    }
  }
}

namespace {

template <typename T, typename Core>
TensorT<T> block_forward(const LKBlockConfig& config, bool activations_enabled,
                         const ConvParamsT<T>& entry_conv,
                         const BatchNormParamsT<T>& entry_bn,
                         const ConvParamsT<T>& exit_conv, const TensorT<T>& x,
                         Core&& core) {
  TensorT<T> cur = x;
  if (config.pre_pointwise) {
    cur = batchnorm_inference(conv2d(cur, entry_conv), entry_bn);
    if (activations_enabled) cur = gelu(cur);
  }
  cur = core(cur);
  if (activations_enabled) cur = relu(cur);
  if (config.post_pointwise) {
    cur = conv2d(cur, exit_conv);
  }
  return cur;
}

}  // namespace

template <typename T>
TensorT<T> forward_multibranch(const LKBlockT<T>& block, const TensorT<T>& x) {
  block.validate();
  if (x.channels != block.config.channels) {
    throw ShapeError("forward_multibranch: input " + x.shape_str() + " has " +
                     std::to_string(x.channels) + " channels, block expects " +
                     std::to_string(block.config.channels));
  }
  return block_forward<T>(
      block.config, block.activations_enabled, block.entry_conv, block.entry_bn,
      block.exit_conv, x, [&](const TensorT<T>& h) {
        TensorT<T> sum = batchnorm_inference(depthwise_conv2d(h, block.large_conv),
                                             block.large_bn);
        for (const auto& br : block.branches) {
          sum = add(sum, batchnorm_inference(depthwise_conv2d(h, br.conv), br.bn));
        }
        return sum;
      });
}

template <typename T>
TensorT<T> forward_fused(const FusedBlockT<T>& block, const TensorT<T>& x) {
  if (x.channels != block.config.channels) {
    throw ShapeError("forward_fused: input " + x.shape_str() + " has " +
                     std::to_string(x.channels) + " channels, block expects " +
                     std::to_string(block.config.channels));
  }
  return block_forward<T>(
      block.config, block.activations_enabled, block.entry_conv, block.entry_bn,
      block.exit_conv, x,
      [&](const TensorT<T>& h) { return depthwise_conv2d(h, block.fused_conv); });
}

template <typename T>
FusedBlockT<T> reparameterize(const LKBlockT<T>& block) {
  block.validate();
  const int K = block.config.large_kernel;
  const int C = block.config.channels;

  FusedBlockT<T> fused;
  fused.config = block.config;
  fused.entry_conv = block.entry_conv;
  fused.entry_bn = block.entry_bn;
  fused.exit_conv = block.exit_conv;
  fused.activations_enabled = block.activations_enabled;

  ConvParamsT<T> folded_large = fold_bn_into_conv(block.large_conv, block.large_bn);
  fused.fused_conv = folded_large;

  const std::size_t taps = static_cast<std::size_t>(K) * K;
  for (const auto& br : block.branches) {
    ConvParamsT<T> folded = fold_bn_into_conv(br.conv, br.bn);
    const int k = br.kernel_size;
    for (int c = 0; c < C; ++c) {
      std::vector<T> small(folded.weights.begin() + static_cast<std::size_t>(c) * k * k,
                           folded.weights.begin() +
                               static_cast<std::size_t>(c + 1) * k * k);
      std::vector<T> dense = dilated_to_dense_kernel(small, k, br.dilation, K);
      T* dst = fused.fused_conv.weights.data() + static_cast<std::size_t>(c) * taps;
      for (std::size_t i = 0; i < taps; ++i) dst[i] += dense[i];
      fused.fused_conv.bias[c] += folded.bias[c];
    }
  }
  return fused;
}

template std::vector<float> dilated_to_dense_kernel(const std::vector<float>&, int,
                                                    int, int);
template std::vector<double> dilated_to_dense_kernel(const std::vector<double>&, int,
                                                     int, int);
template struct LKBlockT<float>;
template struct LKBlockT<double>;
template TensorT<float> forward_multibranch(const LKBlockT<float>&,
                                            const TensorT<float>&);
template TensorT<double> forward_multibranch(const LKBlockT<double>&,
                                             const TensorT<double>&);
template TensorT<float> forward_fused(const FusedBlockT<float>&,
                                      const TensorT<float>&);
template TensorT<double> forward_fused(const FusedBlockT<double>&,
                                       const TensorT<double>&);
template FusedBlockT<float> reparameterize(const LKBlockT<float>&);
template FusedBlockT<double> reparameterize(const LKBlockT<double>&);

}  // namespace lkcell
