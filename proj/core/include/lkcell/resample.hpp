#pragma once

#include "lkcell/tensor.hpp"

namespace lkcell {

// Bilinear upsampling by an integer factor >= 2, align-corners-false
// convention: output pixel y samples the input at (y + 0.5)/factor - 0.5,
// clamped to the valid range. A constant input stays constant.
template <typename T>
TensorT<T> upsample_bilinear(const TensorT<T>& input, int factor);

// Nearest-neighbor upsampling (block repetition), exact for integer data.
template <typename T>
TensorT<T> upsample_nearest(const TensorT<T>& input, int factor);

// Stacks b's channels after a's. Batch and spatial dims must agree.
template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b);

// Copies channels [c_begin, c_end) into a new tensor.
template <typename T>
TensorT<T> slice_channels(const TensorT<T>& t, int c_begin, int c_end);

// Reflective spatial padding (border row/col not repeated). Pad amounts must
// be smaller than the corresponding input extent.
template <typename T>
TensorT<T> pad_reflect(const TensorT<T>& t, int top, int bottom, int left, int right);

// Crops to the window [y0, y0+h) x [x0, x0+w).
template <typename T>
TensorT<T> crop(const TensorT<T>& t, int y0, int x0, int h, int w);

// Pointwise sum of two same-shape tensors.
template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b);

extern template TensorT<float> upsample_bilinear(const TensorT<float>&, int);
extern template TensorT<double> upsample_bilinear(const TensorT<double>&, int);
extern template TensorT<float> upsample_nearest(const TensorT<float>&, int);
extern template TensorT<double> upsample_nearest(const TensorT<double>&, int);
extern template TensorT<float> concat_channels(const TensorT<float>&,
                                               const TensorT<float>&);
extern template TensorT<double> concat_channels(const TensorT<double>&,
                                                const TensorT<double>&);
extern template TensorT<float> slice_channels(const TensorT<float>&, int, int);
extern template TensorT<double> slice_channels(const TensorT<double>&, int, int);
extern template TensorT<float> pad_reflect(const TensorT<float>&, int, int, int, int);
extern template TensorT<double> pad_reflect(const TensorT<double>&, int, int, int, int);
extern template TensorT<float> crop(const TensorT<float>&, int, int, int, int);
extern template TensorT<double> crop(const TensorT<double>&, int, int, int, int);
extern template TensorT<float> add(const TensorT<float>&, const TensorT<float>&);
extern template TensorT<double> add(const TensorT<double>&, const TensorT<double>&);

}  // namespace lkcell
