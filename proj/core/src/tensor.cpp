#include "lkcell/tensor.hpp"

#include <cmath>

namespace lkcell {

template <typename T>
void require_finite(const TensorT<T>& t, const std::string& where) {
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    if (!std::isfinite(t.data[i])) {
      throw ValidationError(where + ": non-finite value at flat index " +
                            std::to_string(i) + " of tensor " + t.shape_str());
    }
  }
}

template <typename T>
Grid<T> channel_plane(const TensorT<T>& t, int n, int c) {
  if (n < 0 || n >= t.batch || c < 0 || c >= t.channels) {
    throw ShapeError("channel_plane: index (" + std::to_string(n) + "," +
                     std::to_string(c) + ") out of range for " + t.shape_str());
  }
  Grid<T> g(t.height, t.width);
  for (int y = 0; y < t.height; ++y) {
    for (int x = 0; x < t.width; ++x) {
      g.at(y, x) = t.at(n, c, y, x);
    }
  }
  return g;
}

template struct TensorT<float>;
template struct TensorT<double>;
template void require_finite(const TensorT<float>&, const std::string&);
template void require_finite(const TensorT<double>&, const std::string&);
template Grid<float> channel_plane(const TensorT<float>&, int, int);
template Grid<double> channel_plane(const TensorT<double>&, int, int);

}  // namespace lkcell
