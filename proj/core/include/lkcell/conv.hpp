#pragma once

#include <utility>
#include <vector>

#include "lkcell/tensor.hpp"

namespace lkcell {

// 2-D convolution parameters. Semantics are cross-correlation with zero
// padding (no kernel flip). Weights are laid out as
// (out_channels, in_channels/groups, kernel_h, kernel_w), row-major.
template <typename T>
struct ConvParamsT {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
  int dilation = 1;
  int padding = 0;
  int groups = 1;
  std::vector<T> weights;
  std::vector<T> bias;  // empty, or one value per out channel

  bool is_depthwise() const {
    return groups == in_channels && groups == out_channels && groups >= 1;
  }

  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * (in_channels / groups) *
           kernel_h * kernel_w;
  }

  std::size_t weight_index(int oc, int icg, int ky, int kx) const {
    return ((static_cast<std::size_t>(oc) * (in_channels / groups) + icg) * kernel_h +
            ky) * kernel_w + kx;
  }

  void validate() const;
};

using ConvParams = ConvParamsT<float>;
using ConvParams64 = ConvParamsT<double>;

// Output spatial extent: floor((in + 2*padding - dilation*(kernel-1) - 1) / stride) + 1.
int conv_output_extent(int in, int kernel, int stride, int dilation, int padding);

// Dense/grouped/dilated 2-D convolution. Each output site accumulates its
// receptive field in fixed (channel, ky, kx) order, so results are
// reproducible bit-for-bit regardless of internal threading.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const ConvParamsT<T>& params);

// Per-channel convolution (groups == channels). Channel c of the output
// depends only on channel c of the input.
template <typename T>
TensorT<T> depthwise_conv2d(const TensorT<T>& input, const ConvParamsT<T>& params);

extern template struct ConvParamsT<float>;
extern template struct ConvParamsT<double>;
extern template TensorT<float> conv2d(const TensorT<float>&, const ConvParamsT<float>&);
extern template TensorT<double> conv2d(const TensorT<double>&, const ConvParamsT<double>&);
extern template TensorT<float> depthwise_conv2d(const TensorT<float>&,
                                                const ConvParamsT<float>&);
extern template TensorT<double> depthwise_conv2d(const TensorT<double>&,
                                                 const ConvParamsT<double>&);

}  // namespace lkcell
