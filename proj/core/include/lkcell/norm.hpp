#pragma once

#include <vector>

#include "lkcell/conv.hpp"
#include "lkcell/tensor.hpp"

namespace lkcell {

// Inference-mode batch normalization parameters, one entry per channel.
template <typename T>
struct BatchNormParamsT {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  T epsilon = T(1e-5);

  int channels() const { return static_cast<int>(gamma.size()); }
  void validate() const;

  // gamma=1, beta=0, mean=0, var=1-eps: folding leaves a conv unchanged.
  static BatchNormParamsT identity(int channels, T epsilon = T(1e-5));
};

using BatchNormParams = BatchNormParamsT<float>;
using BatchNormParams64 = BatchNormParamsT<double>;

// out[c] = gamma[c] * (x - mean[c]) / sqrt(var[c] + eps) + beta[c]
template <typename T>
TensorT<T> batchnorm_inference(const TensorT<T>& input, const BatchNormParamsT<T>& bn);

// Folds a trailing batch norm into the convolution producing its input:
//   w' = w * gamma / sqrt(var + eps)    (per out channel)
//   b' = beta + (b - mean) * gamma / sqrt(var + eps)
// conv2d(x, folded) == batchnorm_inference(conv2d(x, conv), bn) for all x.
template <typename T>
ConvParamsT<T> fold_bn_into_conv(const ConvParamsT<T>& conv,
                                 const BatchNormParamsT<T>& bn);

extern template struct BatchNormParamsT<float>;
extern template struct BatchNormParamsT<double>;
extern template TensorT<float> batchnorm_inference(const TensorT<float>&,
                                                   const BatchNormParamsT<float>&);
extern template TensorT<double> batchnorm_inference(const TensorT<double>&,
                                                    const BatchNormParamsT<double>&);
extern template ConvParamsT<float> fold_bn_into_conv(const ConvParamsT<float>&,
                                                     const BatchNormParamsT<float>&);
extern template ConvParamsT<double> fold_bn_into_conv(const ConvParamsT<double>&,
                                                      const BatchNormParamsT<double>&);

}  // namespace lkcell
