#include "lkcell/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <png.h>

namespace lkcell {

namespace {

struct PngReadCtx {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCtx {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void open_read(PngReadCtx& ctx, const std::string& path) {
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) throw IoError("cannot open image: " + path);
  png_byte header[8];
  if (std::fread(header, 1, 8, ctx.fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path);
  }
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
  if (!ctx.png || !ctx.info) throw IoError("libpng init failed for " + path);
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw FormatError("corrupt PNG file: " + path);
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);
}

void open_write(PngWriteCtx& ctx, const std::string& path) {
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (!ctx.fp) throw IoError("cannot write image: " + path);
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
  if (!ctx.png || !ctx.info) throw IoError("libpng init failed for " + path);
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(ctx.png, ctx.fp);
}

void atomic_rename(const std::string& tmp, const std::string& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace

ImageRGB read_png_rgb8(const std::string& path) {
  PngReadCtx ctx;
  open_read(ctx, path);
  if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("corrupt PNG file: " + path);

  // Normalize any color type to packed 8-bit RGB.
  png_set_strip_16(ctx.png);
  png_set_palette_to_rgb(ctx.png);
  png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_set_gray_to_rgb(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  const int rows = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  const int cols = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  if (png_get_rowbytes(ctx.png, ctx.info) != static_cast<std::size_t>(cols) * 3) {
    throw FormatError("unexpected PNG row layout in " + path);
  }

  ImageRGB img(rows, cols);
  std::vector<png_bytep> row_ptrs(rows);
  for (int y = 0; y < rows; ++y) row_ptrs[y] = img.px.data() + img.index(y, 0);
  png_read_image(ctx.png, row_ptrs.data());
  png_read_end(ctx.png, nullptr);
  return img;
}

void write_png_rgb8(const std::string& path, const ImageRGB& img) {
  const std::string tmp = path + ".tmp";
  {
    PngWriteCtx ctx;
    open_write(ctx, tmp);
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path);
    png_set_IHDR(ctx.png, ctx.info, img.cols, img.rows, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < img.rows; ++y) {
      png_write_row(ctx.png, const_cast<png_bytep>(img.px.data() + img.index(y, 0)));
    }
    png_write_end(ctx.png, nullptr);
  }
  atomic_rename(tmp, path);
}

GridU16 read_png_gray16(const std::string& path) {
  PngReadCtx ctx;
  open_read(ctx, path);
  if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("corrupt PNG file: " + path);

  const png_byte color = png_get_color_type(ctx.png, ctx.info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    throw FormatError("instance mask must be single-channel gray PNG: " + path);
  }
  if (png_get_bit_depth(ctx.png, ctx.info) < 16) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
    // 8-bit masks promote losslessly to 16-bit labels.
  }
  png_read_update_info(ctx.png, ctx.info);
  const int depth = png_get_bit_depth(ctx.png, ctx.info);
  const int rows = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  const int cols = static_cast<int>(png_get_image_width(ctx.png, ctx.info));

  GridU16 grid(rows, cols);
  if (depth == 16) {
    std::vector<std::uint8_t> row(static_cast<std::size_t>(cols) * 2);
    for (int y = 0; y < rows; ++y) {
      png_read_row(ctx.png, row.data(), nullptr);
      for (int x = 0; x < cols; ++x) {
        grid.at(y, x) = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
      }
    }
  } else {
    std::vector<std::uint8_t> row(cols);
    for (int y = 0; y < rows; ++y) {
      png_read_row(ctx.png, row.data(), nullptr);
      for (int x = 0; x < cols; ++x) grid.at(y, x) = row[x];
    }
  }
  png_read_end(ctx.png, nullptr);
  return grid;
}

void write_png_gray16(const std::string& path, const GridU16& grid) {
  const std::string tmp = path + ".tmp";
  {
    PngWriteCtx ctx;
    open_write(ctx, tmp);
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path);
    png_set_IHDR(ctx.png, ctx.info, grid.cols, grid.rows, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(grid.cols) * 2);
    for (int y = 0; y < grid.rows; ++y) {
      for (int x = 0; x < grid.cols; ++x) {
        row[2 * x] = static_cast<std::uint8_t>(grid.at(y, x) >> 8);
        row[2 * x + 1] = static_cast<std::uint8_t>(grid.at(y, x) & 0xff);
      }
      png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
  }
  atomic_rename(tmp, path);
}

GridB read_png_gray8(const std::string& path) {
  PngReadCtx ctx;
  open_read(ctx, path);
  if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("corrupt PNG file: " + path);

  if (png_get_color_type(ctx.png, ctx.info) != PNG_COLOR_TYPE_GRAY) {
    throw FormatError("class mask must be single-channel gray PNG: " + path);
  }
  if (png_get_bit_depth(ctx.png, ctx.info) > 8) {
    throw FormatError("class mask must be 8-bit: " + path);
  }
  png_set_expand_gray_1_2_4_to_8(ctx.png);
  png_read_update_info(ctx.png, ctx.info);
  const int rows = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  const int cols = static_cast<int>(png_get_image_width(ctx.png, ctx.info));

  GridB grid(rows, cols);
  for (int y = 0; y < rows; ++y) {
    png_read_row(ctx.png, grid.v.data() + grid.index(y, 0), nullptr);
  }
  png_read_end(ctx.png, nullptr);
  return grid;
}

void write_png_gray8(const std::string& path, const GridB& grid) {
  const std::string tmp = path + ".tmp";
  {
    PngWriteCtx ctx;
    open_write(ctx, tmp);
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path);
    png_set_IHDR(ctx.png, ctx.info, grid.cols, grid.rows, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < grid.rows; ++y) {
      png_write_row(ctx.png, const_cast<png_bytep>(grid.v.data() + grid.index(y, 0)));
    }
    png_write_end(ctx.png, nullptr);
  }
  atomic_rename(tmp, path);
}

static_assert(std::endian::native == std::endian::little,
              "lkt tensor I/O assumes a little-endian host");

Tensor read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "LKT1", 4) != 0) {
    throw FormatError("not a lkt tensor file: " + path);
  }
  std::uint32_t ndims = 0;
  in.read(reinterpret_cast<char*>(&ndims), 4);
  if (!in || ndims != 4) {
    throw FormatError("lkt tensor must be rank 4: " + path);
  }
  std::uint64_t dims[4];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) throw IoError("truncated tensor file: " + path);
  for (auto d : dims) {
    if (d == 0 || d > (1u << 20)) throw FormatError("bad dims in " + path);
  }
  Tensor t(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
           static_cast<int>(dims[2]), static_cast<int>(dims[3]));
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(t.data.size() * sizeof(float))) {
    throw IoError("truncated tensor file: " + path);
  }
  return t;
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write tensor file: " + path);
    os.write("LKT1", 4);
    const std::uint32_t ndims = 4;
    os.write(reinterpret_cast<const char*>(&ndims), 4);
    const std::uint64_t dims[4] = {
        static_cast<std::uint64_t>(t.batch), static_cast<std::uint64_t>(t.channels),
        static_cast<std::uint64_t>(t.height), static_cast<std::uint64_t>(t.width)};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!os) throw IoError("failed writing tensor file: " + path);
  }
  atomic_rename(tmp, path);
}

Tensor image_to_tensor(const ImageRGB& img) {
  Tensor t(1, 3, img.rows, img.cols);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const std::size_t p = img.index(y, x);
      for (int c = 0; c < 3; ++c) {
        t.at(0, c, y, x) = static_cast<float>(img.px[p + c]) / 255.0f;
      }
    }
  }
  return t;
}

ImageRGB tensor_to_image(const Tensor& t, int batch_index) {
  if (t.channels != 3) {
    throw ShapeError("tensor_to_image: expected 3 channels, got " + t.shape_str());
  }
  ImageRGB img(t.height, t.width);
  for (int y = 0; y < t.height; ++y) {
    for (int x = 0; x < t.width; ++x) {
      const std::size_t p = img.index(y, x);
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(t.at(batch_index, c, y, x), 0.0f, 1.0f);
        img.px[p + c] = static_cast<std::uint8_t>(v * 255.0f + 0.5f);
      }
    }
  }
  return img;
}

}  // namespace lkcell
