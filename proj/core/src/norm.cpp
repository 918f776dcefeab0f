#include "lkcell/norm.hpp"

#include <cmath>
#include <string>

namespace lkcell {

template <typename T>
void BatchNormParamsT<T>::validate() const {
  const std::size_t n = gamma.size();
  if (n == 0) throw ConfigError("batchnorm: empty parameter arrays");
  if (beta.size() != n || running_mean.size() != n || running_var.size() != n) {
    throw ConfigError("batchnorm: parameter arrays disagree on channel count (" +
                      std::to_string(gamma.size()) + "," + std::to_string(beta.size()) +
                      "," + std::to_string(running_mean.size()) + "," +
                      std::to_string(running_var.size()) + ")");
  }
  if (!(epsilon > T(0))) throw ConfigError("batchnorm: epsilon must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (running_var[i] < T(0)) {
      throw ConfigError("batchnorm: running_var[" + std::to_string(i) +
                        "] is negative");
    }
  }
}

template <typename T>
BatchNormParamsT<T> BatchNormParamsT<T>::identity(int channels, T epsilon) {
  BatchNormParamsT<T> bn;
  bn.gamma.assign(channels, T(1));
  bn.beta.assign(channels, T(0));
  bn.running_mean.assign(channels, T(0));
  bn.running_var.assign(channels, T(1) - epsilon);
  bn.epsilon = epsilon;
  return bn;
}

template <typename T>
TensorT<T> batchnorm_inference(const TensorT<T>& input, const BatchNormParamsT<T>& bn) {
  bn.validate();
  if (bn.channels() != input.channels) {
    throw ConfigError("batchnorm_inference: params cover " +
                      std::to_string(bn.channels()) + " channels but input is " +
                      input.shape_str());
  }
  require_finite(input, "batchnorm_inference");

  TensorT<T> out(input.batch, input.channels, input.height, input.width);
  const std::size_t plane = static_cast<std::size_t>(input.height) * input.width;
  for (int n = 0; n < input.batch; ++n) {
    for (int c = 0; c < input.channels; ++c) {
      const T scale = bn.gamma[c] / std::sqrt(bn.running_var[c] + bn.epsilon);
      const T shift = bn.beta[c] - bn.running_mean[c] * scale;
      const T* src = input.data.data() + input.index(n, c, 0, 0);
      T* dst = out.data.data() + out.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * scale + shift;
    }
  }
  return out;
}

template <typename T>
ConvParamsT<T> fold_bn_into_conv(const ConvParamsT<T>& conv,
                                 const BatchNormParamsT<T>& bn) {
  conv.validate();
  bn.validate();
  if (bn.channels() != conv.out_channels) {
    throw ConfigError("fold_bn_into_conv: bn covers " + std::to_string(bn.channels()) +
                      " channels but conv has " + std::to_string(conv.out_channels) +
                      " outputs");
  }

  ConvParamsT<T> folded = conv;
  folded.bias.assign(conv.out_channels, T(0));
  const std::size_t per_oc = conv.weight_count() / conv.out_channels;
  for (int oc = 0; oc < conv.out_channels; ++oc) {
    const T scale = bn.gamma[oc] / std::sqrt(bn.running_var[oc] + bn.epsilon);
    T* w = folded.weights.data() + static_cast<std::size_t>(oc) * per_oc;
    for (std::size_t i = 0; i < per_oc; ++i) w[i] *= scale;
    const T b = conv.bias.empty() ? T(0) : conv.bias[oc];
    folded.bias[oc] = bn.beta[oc] + (b - bn.running_mean[oc]) * scale;
  }
  return folded;
}

template struct BatchNormParamsT<float>;
template struct BatchNormParamsT<double>;
template TensorT<float> batchnorm_inference(const TensorT<float>&,
                                            const BatchNormParamsT<float>&);
template TensorT<double> batchnorm_inference(const TensorT<double>&,
                                             const BatchNormParamsT<double>&);
template ConvParamsT<float> fold_bn_into_conv(const ConvParamsT<float>&,
                                              const BatchNormParamsT<float>&);
template ConvParamsT<double> fold_bn_into_conv(const ConvParamsT<double>&,
                                               const BatchNormParamsT<double>&);

}  // namespace lkcell
