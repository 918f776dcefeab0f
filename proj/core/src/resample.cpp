#include "lkcell/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace lkcell {

namespace {

// Source coordinate and blend weight for one output index, align-corners-false.
template <typename T>
void bilinear_taps(int out_idx, int factor, int in_extent, int& lo, int& hi, T& w_hi) {
  const double src = (out_idx + 0.5) / factor - 0.5;
  double floor_src = std::floor(src);
  lo = static_cast<int>(floor_src);
  hi = lo + 1;
  w_hi = static_cast<T>(src - floor_src);
  if (lo < 0) {
    lo = 0;
    hi = 0;
    w_hi = T(0);
  }
  if (hi >= in_extent) {
    hi = in_extent - 1;
    if (lo >= in_extent) lo = in_extent - 1;
    if (lo == hi) w_hi = T(0);
  }
}

}  // namespace

template <typename T>
TensorT<T> upsample_bilinear(const TensorT<T>& input, int factor) {
  if (factor < 2) {
    throw ConfigError("upsample_bilinear: factor must be >= 2, got " +
                      std::to_string(factor));
  }
  require_finite(input, "upsample_bilinear");
  const int out_h = input.height * factor;
  const int out_w = input.width * factor;
  TensorT<T> out(input.batch, input.channels, out_h, out_w);

  std::vector<int> x_lo(out_w), x_hi(out_w);
  std::vector<T> x_w(out_w);
  for (int x = 0; x < out_w; ++x) bilinear_taps(x, factor, input.width, x_lo[x], x_hi[x], x_w[x]);

  for (int n = 0; n < input.batch; ++n) {
    for (int c = 0; c < input.channels; ++c) {
      for (int y = 0; y < out_h; ++y) {
        int y_lo, y_hi;
        T wy;
        bilinear_taps(y, factor, input.height, y_lo, y_hi, wy);
        const T* row_lo = input.data.data() + input.index(n, c, y_lo, 0);
        const T* row_hi = input.data.data() + input.index(n, c, y_hi, 0);
        T* dst = out.data.data() + out.index(n, c, y, 0);
        for (int x = 0; x < out_w; ++x) {
          const T wx = x_w[x];
          const T top = row_lo[x_lo[x]] * (T(1) - wx) + row_lo[x_hi[x]] * wx;
          const T bot = row_hi[x_lo[x]] * (T(1) - wx) + row_hi[x_hi[x]] * wx;
          dst[x] = top * (T(1) - wy) + bot * wy;
        }
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> upsample_nearest(const TensorT<T>& input, int factor) {
  if (factor < 2) {
    throw ConfigError("upsample_nearest: factor must be >= 2, got " +
                      std::to_string(factor));
  }
  TensorT<T> out(input.batch, input.channels, input.height * factor,
                 input.width * factor);
  for (int n = 0; n < input.batch; ++n) {
    for (int c = 0; c < input.channels; ++c) {
      for (int y = 0; y < out.height; ++y) {
        const T* src = input.data.data() + input.index(n, c, y / factor, 0);
        T* dst = out.data.data() + out.index(n, c, y, 0);
        for (int x = 0; x < out.width; ++x) dst[x] = src[x / factor];
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.batch != b.batch || a.height != b.height || a.width != b.width) {
    throw ShapeError("concat_channels: batch/spatial dims disagree, " +
                     a.shape_str() + " vs " + b.shape_str());
  }
  TensorT<T> out(a.batch, a.channels + b.channels, a.height, a.width);
  const std::size_t plane = static_cast<std::size_t>(a.height) * a.width;
  for (int n = 0; n < a.batch; ++n) {
    for (int c = 0; c < a.channels; ++c) {
      std::copy_n(a.data.data() + a.index(n, c, 0, 0), plane,
                  out.data.data() + out.index(n, c, 0, 0));
    }
    for (int c = 0; c < b.channels; ++c) {
      std::copy_n(b.data.data() + b.index(n, c, 0, 0), plane,
                  out.data.data() + out.index(n, a.channels + c, 0, 0));
    }
  }
  return out;
}

template <typename T>
TensorT<T> slice_channels(const TensorT<T>& t, int c_begin, int c_end) {
  if (c_begin < 0 || c_end > t.channels || c_begin >= c_end) {
    throw ShapeError("slice_channels: range [" + std::to_string(c_begin) + "," +
                     std::to_string(c_end) + ") invalid for " + t.shape_str());
  }
  TensorT<T> out(t.batch, c_end - c_begin, t.height, t.width);
  const std::size_t plane = static_cast<std::size_t>(t.height) * t.width;
  for (int n = 0; n < t.batch; ++n) {
    for (int c = c_begin; c < c_end; ++c) {
      std::copy_n(t.data.data() + t.index(n, c, 0, 0), plane,
                  out.data.data() + out.index(n, c - c_begin, 0, 0));
    }
  }
  return out;
}

template <typename T>
TensorT<T> pad_reflect(const TensorT<T>& t, int top, int bottom, int left, int right) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw ConfigError("pad_reflect: negative pad amount");
  }
  if (top >= t.height || bottom >= t.height || left >= t.width || right >= t.width) {
    throw ConfigError("pad_reflect: pad amount must be smaller than the input extent");
  }
  TensorT<T> out(t.batch, t.channels, t.height + top + bottom, t.width + left + right);
  auto reflect = [](int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
  };
  for (int n = 0; n < t.batch; ++n) {
    for (int c = 0; c < t.channels; ++c) {
      for (int y = 0; y < out.height; ++y) {
        const int sy = reflect(y - top, t.height);
        const T* src = t.data.data() + t.index(n, c, sy, 0);
        T* dst = out.data.data() + out.index(n, c, y, 0);
        for (int x = 0; x < out.width; ++x) dst[x] = src[reflect(x - left, t.width)];
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> crop(const TensorT<T>& t, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > t.height || x0 + w > t.width) {
    throw ShapeError("crop: window (" + std::to_string(y0) + "," + std::to_string(x0) +
                     "," + std::to_string(h) + "," + std::to_string(w) +
                     ") out of range for " + t.shape_str());
  }
  TensorT<T> out(t.batch, t.channels, h, w);
  for (int n = 0; n < t.batch; ++n) {
    for (int c = 0; c < t.channels; ++c) {
      for (int y = 0; y < h; ++y) {
        std::copy_n(t.data.data() + t.index(n, c, y0 + y, x0), w,
                    out.data.data() + out.index(n, c, y, 0));
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: shapes disagree, " + a.shape_str() + " vs " + b.shape_str());
  }
  TensorT<T> out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

template TensorT<float> upsample_bilinear(const TensorT<float>&, int);
template TensorT<double> upsample_bilinear(const TensorT<double>&, int);
template TensorT<float> upsample_nearest(const TensorT<float>&, int);
template TensorT<double> upsample_nearest(const TensorT<double>&, int);
template TensorT<float> concat_channels(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> concat_channels(const TensorT<double>&, const TensorT<double>&);
template TensorT<float> slice_channels(const TensorT<float>&, int, int);
template TensorT<double> slice_channels(const TensorT<double>&, int, int);
template TensorT<float> pad_reflect(const TensorT<float>&, int, int, int, int);
template TensorT<double> pad_reflect(const TensorT<double>&, int, int, int, int);
template TensorT<float> crop(const TensorT<float>&, int, int, int, int);
template TensorT<double> crop(const TensorT<double>&, int, int, int, int);
template TensorT<float> add(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> add(const TensorT<double>&, const TensorT<double>&);

}  // namespace lkcell
