#pragma once

#include "lkcell/tensor.hpp"

namespace lkcell {

// max(0, x)
template <typename T>
TensorT<T> relu(const TensorT<T>& input);

// Exact-erf GELU: x * Phi(x) with Phi the standard normal CDF.
template <typename T>
TensorT<T> gelu(const TensorT<T>& input);

// tanh applied pointwise; output in [-1, 1].
template <typename T>
TensorT<T> tanh_map(const TensorT<T>& input);

// Softmax across the channel dimension at every (batch, y, x) site, computed
// with per-site max subtraction.
template <typename T>
TensorT<T> softmax_channels(const TensorT<T>& input);

extern template TensorT<float> relu(const TensorT<float>&);
extern template TensorT<double> relu(const TensorT<double>&);
extern template TensorT<float> gelu(const TensorT<float>&);
extern template TensorT<double> gelu(const TensorT<double>&);
extern template TensorT<float> tanh_map(const TensorT<float>&);
extern template TensorT<double> tanh_map(const TensorT<double>&);
extern template TensorT<float> softmax_channels(const TensorT<float>&);
extern template TensorT<double> softmax_channels(const TensorT<double>&);

}  // namespace lkcell
