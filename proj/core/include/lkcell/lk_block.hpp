#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lkcell/conv.hpp"
#include "lkcell/norm.hpp"
#include "lkcell/tensor.hpp"

namespace lkcell {

// Effective kernel extent of a depthwise convolution at dilation d:
// (2d-1) x (2d-1).
std::pair<int, int> dw_kernel_footprint(int dilation);

// Tap-count product (2d-1)^2 * m * k^2 for a depthwise kernel paralleled
// with m small k x k kernels merged by structural reparameterization.
std::uint64_t reparam_footprint(int dilation, int num_kernels, int small_kernel);

// Embeds a k x k kernel with dilation r into a dense K x K kernel: the k^2
// source taps land at stride r around the center, zeros elsewhere. Dense
// convolution at padding K/2 then equals the dilated convolution at padding
// r*(k-1)/2. Requires (k-1)*r + 1 <= K and odd k, K.
template <typename T>
std::vector<T> dilated_to_dense_kernel(const std::vector<T>& kernel, int k, int r,
                                       int K);

// One parallel small-kernel branch: depthwise conv at dilation r + batch norm.
template <typename T>
struct DilatedBranchT {
  int kernel_size = 0;
  int dilation = 1;
  ConvParamsT<T> conv;
  BatchNormParamsT<T> bn;
};

struct LKBlockConfig {
  int channels = 0;
  int large_kernel = 13;
  std::vector<std::pair<int, int>> branches;  // (kernel size k, dilation r)
  bool pre_pointwise = true;
  bool post_pointwise = true;

  // Enforces odd kernels and the per-branch extent constraint
  // (k-1)*r + 1 <= large_kernel.
  void validate() const;
};

// The LKCell block: a non-dilated large-kernel depthwise convolution plus n
// parallel dilated small-kernel depthwise branches, each batch-normalized,
// summed before the nonlinearity. Optional 1x1 entry/exit convolutions wrap
// the depthwise core. Layout:
//
//   entry (if enabled):  1x1 conv -> BN -> GELU
//   core:                BN(dw_KxK(x)) + sum_i BN_i(dw_{k_i, r_i}(x))
//   activation:          ReLU
//   exit (if enabled):   1x1 conv (with bias)
//
// Every sub-convolution uses "same" padding (K/2 for the large kernel,
// r*(k-1)/2 per branch), so all summands share the input's spatial dims.
template <typename T>
struct LKBlockT {
  LKBlockConfig config;
  ConvParamsT<T> large_conv;
  BatchNormParamsT<T> large_bn;
  std::vector<DilatedBranchT<T>> branches;
  ConvParamsT<T> entry_conv;  // used when config.pre_pointwise
  BatchNormParamsT<T> entry_bn;
  ConvParamsT<T> exit_conv;   // used when config.post_pointwise
  bool activations_enabled = true;  // test hook: exposes the linear core

  void validate() const;
};

// Structurally reparameterized form: the depthwise core collapsed into a
// single K x K depthwise convolution with bias. Entry/exit convs and the
// activation chain are identical to the source block.
template <typename T>
struct FusedBlockT {
  LKBlockConfig config;
  ConvParamsT<T> fused_conv;
  ConvParamsT<T> entry_conv;
  BatchNormParamsT<T> entry_bn;
  ConvParamsT<T> exit_conv;
  bool activations_enabled = true;
};

using DilatedBranch = DilatedBranchT<float>;
using LKBlock = LKBlockT<float>;
using FusedBlock = FusedBlockT<float>;

template <typename T>
TensorT<T> forward_multibranch(const LKBlockT<T>& block, const TensorT<T>& x);

template <typename T>
TensorT<T> forward_fused(const FusedBlockT<T>& block, const TensorT<T>& x);

// fused kernel = fold_bn(large) + sum_i embed(fold_bn(branch_i));
// fused bias = sum of the folded biases. forward_fused(reparameterize(b), x)
// equals forward_multibranch(b, x) up to floating-point error.
template <typename T>
FusedBlockT<T> reparameterize(const LKBlockT<T>& block);

extern template std::vector<float> dilated_to_dense_kernel(const std::vector<float>&,
                                                           int, int, int);
extern template std::vector<double> dilated_to_dense_kernel(const std::vector<double>&,
                                                            int, int, int);
extern template struct LKBlockT<float>;
extern template struct LKBlockT<double>;
extern template TensorT<float> forward_multibranch(const LKBlockT<float>&,
                                                   const TensorT<float>&);
extern template TensorT<double> forward_multibranch(const LKBlockT<double>&,
                                                    const TensorT<double>&);
extern template TensorT<float> forward_fused(const FusedBlockT<float>&,
                                             const TensorT<float>&);
extern template TensorT<double> forward_fused(const FusedBlockT<double>&,
                                              const TensorT<double>&);
extern template FusedBlockT<float> reparameterize(const LKBlockT<float>&);
extern template FusedBlockT<double> reparameterize(const LKBlockT<double>&);

}  // namespace lkcell
