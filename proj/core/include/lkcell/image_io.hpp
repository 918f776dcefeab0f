#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lkcell/tensor.hpp"

namespace lkcell {

// Interleaved 8-bit RGB raster.
struct ImageRGB {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> px;  // rows * cols * 3

  ImageRGB() = default;
  ImageRGB(int r, int c) : rows(r), cols(c), px(static_cast<std::size_t>(r) * c * 3, 0) {}
  std::size_t index(int y, int x) const {
    return (static_cast<std::size_t>(y) * cols + x) * 3;
  }
};

// PNG readers accept gray/palette/alpha variants and normalize to the
// requested layout; writers always emit the exact bit depth named. All
// writes go through a temp file + rename.
ImageRGB read_png_rgb8(const std::string& path);
void write_png_rgb8(const std::string& path, const ImageRGB& img);

GridU16 read_png_gray16(const std::string& path);
void write_png_gray16(const std::string& path, const GridU16& grid);

GridB read_png_gray8(const std::string& path);
void write_png_gray8(const std::string& path, const GridB& grid);

// Raw float tensor file (.lkt): magic "LKT1" | u32 ndims | u64 dims[] |
// f32 data, all little-endian. Used by the --from-maps inference bypass.
Tensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const Tensor& t);

// RGB image <-> float tensor in [0, 1], channel-planar.
Tensor image_to_tensor(const ImageRGB& img);
ImageRGB tensor_to_image(const Tensor& t, int batch_index = 0);

}  // namespace lkcell
