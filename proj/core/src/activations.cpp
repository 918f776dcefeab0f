#include "lkcell/activations.hpp"

#include <cmath>

namespace lkcell {

template <typename T>
TensorT<T> relu(const TensorT<T>& input) {
  require_finite(input, "relu");
  TensorT<T> out = input;
  for (T& v : out.data) {
    if (v < T(0)) v = T(0);
  }
  return out;
}

template <typename T>
TensorT<T> gelu(const TensorT<T>& input) {
  require_finite(input, "gelu");
  TensorT<T> out = input;
  const T inv_sqrt2 = T(0.70710678118654752440);
  for (T& v : out.data) {
    v = v * T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
  }
  return out;
}

template <typename T>
TensorT<T> tanh_map(const TensorT<T>& input) {
  require_finite(input, "tanh_map");
  TensorT<T> out = input;
  for (T& v : out.data) v = std::tanh(v);
  return out;
}

template <typename T>
TensorT<T> softmax_channels(const TensorT<T>& input) {
  require_finite(input, "softmax_channels");
  TensorT<T> out(input.batch, input.channels, input.height, input.width);
  const int C = input.channels;
  for (int n = 0; n < input.batch; ++n) {
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        T mx = input.at(n, 0, y, x);
        for (int c = 1; c < C; ++c) mx = std::max(mx, input.at(n, c, y, x));
        T sum = T(0);
        for (int c = 0; c < C; ++c) {
          const T e = std::exp(input.at(n, c, y, x) - mx);
          out.at(n, c, y, x) = e;
          sum += e;
        }
        for (int c = 0; c < C; ++c) out.at(n, c, y, x) /= sum;
      }
    }
  }
  return out;
}

template TensorT<float> relu(const TensorT<float>&);
template TensorT<double> relu(const TensorT<double>&);
template TensorT<float> gelu(const TensorT<float>&);
template TensorT<double> gelu(const TensorT<double>&);
template TensorT<float> tanh_map(const TensorT<float>&);
template TensorT<double> tanh_map(const TensorT<double>&);
template TensorT<float> softmax_channels(const TensorT<float>&);
template TensorT<double> softmax_channels(const TensorT<double>&);

}  // namespace lkcell
