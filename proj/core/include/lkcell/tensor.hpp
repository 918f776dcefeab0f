#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lkcell/errors.hpp"

namespace lkcell {

// Dense 4-D array in (batch, channels, height, width) order, row-major with
// width fastest. All feature maps in the pipeline use this layout.
template <typename T>
struct TensorT {
  int batch = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  TensorT() = default;
  TensorT(int n, int c, int h, int w, T fill = T(0))
      : batch(n), channels(c), height(h), width(w),
        data(checked_size(n, c, h, w), fill) {}

  static std::size_t checked_size(int n, int c, int h, int w) {
    if (n < 1 || c < 1 || h < 1 || w < 1) {
      throw ShapeError("tensor dims must be positive, got (" + std::to_string(n) +
                       "," + std::to_string(c) + "," + std::to_string(h) + "," +
                       std::to_string(w) + ")");
    }
    return static_cast<std::size_t>(n) * c * h * w;
  }

  std::size_t size() const { return data.size(); }

  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * channels + c) * height + y) * width + x;
  }

  T& at(int n, int c, int y, int x) { return data[index(n, c, y, x)]; }
  const T& at(int n, int c, int y, int x) const { return data[index(n, c, y, x)]; }

  bool same_shape(const TensorT& o) const {
    return batch == o.batch && channels == o.channels && height == o.height &&
           width == o.width;
  }

  std::string shape_str() const {
    return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
           std::to_string(height) + "," + std::to_string(width) + ")";
  }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

// Throws ValidationError if any element is NaN or infinite.
template <typename T>
void require_finite(const TensorT<T>& t, const std::string& where);

// 2-D grid used by postprocessing and metrics (height-major, width fastest).
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Grid() = default;
  Grid(int r, int c, T fill = T(0))
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {
    if (r < 1 || c < 1) {
      throw ShapeError("grid dims must be positive, got (" + std::to_string(r) +
                       "," + std::to_string(c) + ")");
    }
  }

  std::size_t size() const { return v.size(); }
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * cols + x;
  }
  T& at(int y, int x) { return v[index(y, x)]; }
  const T& at(int y, int x) const { return v[index(y, x)]; }
  template <typename U>
  bool same_shape(const Grid<U>& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

using GridF = Grid<float>;
using GridI = Grid<std::int32_t>;
using GridB = Grid<std::uint8_t>;
using GridU16 = Grid<std::uint16_t>;

// Extracts one (H, W) channel plane from a 4-D tensor.
template <typename T>
Grid<T> channel_plane(const TensorT<T>& t, int n, int c);

extern template struct TensorT<float>;
extern template struct TensorT<double>;
extern template void require_finite(const TensorT<float>&, const std::string&);
extern template void require_finite(const TensorT<double>&, const std::string&);
extern template Grid<float> channel_plane(const TensorT<float>&, int, int);
extern template Grid<double> channel_plane(const TensorT<double>&, int, int);

}  // namespace lkcell
