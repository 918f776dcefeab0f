#include "lkcell/conv.hpp"

#include <string>

#include "lkcell/parallel.hpp"

namespace lkcell {

template <typename T>
void ConvParamsT<T>::validate() const {
  if (in_channels < 1 || out_channels < 1) {
    throw ConfigError("conv: channel counts must be positive (in=" +
                      std::to_string(in_channels) + ", out=" +
                      std::to_string(out_channels) + ")");
  }
  if (kernel_h < 1 || kernel_w < 1) {
    throw ConfigError("conv: kernel dims must be positive (" +
                      std::to_string(kernel_h) + "x" + std::to_string(kernel_w) + ")");
  }
  if (stride < 1 || dilation < 1) {
    throw ConfigError("conv: stride and dilation must be >= 1");
  }
  if (padding < 0) {
    throw ConfigError("conv: padding must be non-negative");
  }
  if (groups < 1 || in_channels % groups != 0 || out_channels % groups != 0) {
    throw ConfigError("conv: groups=" + std::to_string(groups) +
                      " must divide in_channels=" + std::to_string(in_channels) +
                      " and out_channels=" + std::to_string(out_channels));
  }
  if (weights.size() != weight_count()) {
    throw ConfigError("conv: weight array has " + std::to_string(weights.size()) +
                      " elements, expected " + std::to_string(weight_count()));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ConfigError("conv: bias array has " + std::to_string(bias.size()) +
                      " elements, expected " + std::to_string(out_channels));
  }
}

int conv_output_extent(int in, int kernel, int stride, int dilation, int padding) {
  int span = dilation * (kernel - 1) + 1;
  int numer = in + 2 * padding - span;
  if (numer < 0) return 0;
  return numer / stride + 1;
}

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const ConvParamsT<T>& params) {
  params.validate();
  if (input.channels != params.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(input.channels) +
                     " channels but params expect " +
                     std::to_string(params.in_channels) + " (input " +
                     input.shape_str() + ")");
  }
  require_finite(input, "conv2d");

  const int out_h = conv_output_extent(input.height, params.kernel_h, params.stride,
                                       params.dilation, params.padding);
  const int out_w = conv_output_extent(input.width, params.kernel_w, params.stride,
                                       params.dilation, params.padding);
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("conv2d: output would be empty for input " + input.shape_str() +
                     " with kernel " + std::to_string(params.kernel_h) + "x" +
                     std::to_string(params.kernel_w) + ", stride " +
                     std::to_string(params.stride) + ", dilation " +
                     std::to_string(params.dilation) + ", padding " +
                     std::to_string(params.padding));
  }

  TensorT<T> out(input.batch, params.out_channels, out_h, out_w);
  const int icg = params.in_channels / params.groups;
  const int ocg = params.out_channels / params.groups;
  const int H = input.height, W = input.width;
  const int kh = params.kernel_h, kw = params.kernel_w;
  const int stride = params.stride, dil = params.dilation, pad = params.padding;

  const std::size_t jobs = static_cast<std::size_t>(input.batch) * params.out_channels;
  parallel_for(jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t job = begin; job < end; ++job) {
      const int n = static_cast<int>(job / params.out_channels);
      const int oc = static_cast<int>(job % params.out_channels);
      const int g = oc / ocg;
      const T b = params.bias.empty() ? T(0) : params.bias[oc];
      T* dst = out.data.data() + out.index(n, oc, 0, 0);
      for (int oy = 0; oy < out_h; ++oy) {
        const int iy0 = oy * stride - pad;
        for (int ox = 0; ox < out_w; ++ox) {
          const int ix0 = ox * stride - pad;
          T acc = b;
          for (int ic = 0; ic < icg; ++ic) {
            const T* src = input.data.data() + input.index(n, g * icg + ic, 0, 0);
            const T* wrow = params.weights.data() + params.weight_index(oc, ic, 0, 0);
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = iy0 + ky * dil;
              if (iy < 0 || iy >= H) continue;
              const T* srow = src + static_cast<std::size_t>(iy) * W;
              const T* wk = wrow + static_cast<std::size_t>(ky) * kw;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ix0 + kx * dil;
                if (ix < 0 || ix >= W) continue;
                acc += srow[ix] * wk[kx];
              }
            }
          }
          dst[static_cast<std::size_t>(oy) * out_w + ox] = acc;
        }
      }
    }
  });
  return out;
}

template <typename T>
TensorT<T> depthwise_conv2d(const TensorT<T>& input, const ConvParamsT<T>& params) {
  if (!params.is_depthwise()) {
    throw ConfigError("depthwise_conv2d: requires groups == in_channels == "
                      "out_channels, got groups=" + std::to_string(params.groups) +
                      ", in=" + std::to_string(params.in_channels) + ", out=" +
                      std::to_string(params.out_channels));
  }
  return conv2d(input, params);
}

template struct ConvParamsT<float>;
template struct ConvParamsT<double>;
template TensorT<float> conv2d(const TensorT<float>&, const ConvParamsT<float>&);
template TensorT<double> conv2d(const TensorT<double>&, const ConvParamsT<double>&);
template TensorT<float> depthwise_conv2d(const TensorT<float>&,
                                         const ConvParamsT<float>&);
template TensorT<double> depthwise_conv2d(const TensorT<double>&,
                                          const ConvParamsT<double>&);

}  // namespace lkcell
