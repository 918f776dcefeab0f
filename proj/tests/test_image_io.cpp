#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "lkcell/image_io.hpp"
#include "oracles.hpp"

using namespace lkcell;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lkcell_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rgb8 png round-trips exactly") {
  TempDir tmp;
  std::mt19937 rng(1);
  ImageRGB img(13, 17);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.px) v = static_cast<std::uint8_t>(d(rng));

  const std::string path = tmp.file("a.png");
  write_png_rgb8(path, img);
  ImageRGB back = read_png_rgb8(path);
  CHECK(back.rows == img.rows);
  CHECK(back.cols == img.cols);
  CHECK(back.px == img.px);
}

TEST_CASE("gray16 png preserves full 16-bit label fidelity") {
  TempDir tmp;
  GridU16 grid(9, 11);
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> d(0, 65535);
  for (auto& v : grid.v) v = static_cast<std::uint16_t>(d(rng));
  grid.at(0, 0) = 0;
  grid.at(8, 10) = 65535;

  const std::string path = tmp.file("mask.png");
  write_png_gray16(path, grid);
  GridU16 back = read_png_gray16(path);
  CHECK(back.v == grid.v);
}

TEST_CASE("gray8 png round-trips and rejects wrong color types") {
  TempDir tmp;
  GridB grid(7, 5);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : grid.v) v = static_cast<std::uint8_t>(d(rng));

  const std::string path = tmp.file("cls.png");
  write_png_gray8(path, grid);
  CHECK(read_png_gray8(path).v == grid.v);

  ImageRGB rgb(4, 4);
  const std::string rgb_path = tmp.file("rgb.png");
  write_png_rgb8(rgb_path, rgb);
  CHECK_THROWS_AS(read_png_gray8(rgb_path), FormatError);
  CHECK_THROWS_AS(read_png_gray16(rgb_path), FormatError);
}

TEST_CASE("png writes are deterministic byte-for-byte") {
  TempDir tmp;
  std::mt19937 rng(4);
  ImageRGB img(16, 16);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.px) v = static_cast<std::uint8_t>(d(rng));
  write_png_rgb8(tmp.file("x.png"), img);
  write_png_rgb8(tmp.file("y.png"), img);
  CHECK(slurp(tmp.file("x.png")) == slurp(tmp.file("y.png")));
}

TEST_CASE("missing and non-PNG files raise distinct errors") {
  TempDir tmp;
  CHECK_THROWS_AS(read_png_rgb8(tmp.file("absent.png")), IoError);
  const std::string junk = tmp.file("junk.png");
  std::ofstream(junk) << "definitely not a png";
  CHECK_THROWS_AS(read_png_rgb8(junk), FormatError);
}

TEST_CASE("tensor files round-trip bitwise") {
  TempDir tmp;
  std::mt19937 rng(5);
  Tensor t = oracles::random_tensor<float>(rng, 2, 3, 5, 7);
  const std::string path = tmp.file("t.lkt");
  write_tensor_file(path, t);
  Tensor back = read_tensor_file(path);
  CHECK(back.same_shape(t));
  CHECK(back.data == t.data);

  const std::string junk = tmp.file("junk.lkt");
  std::ofstream(junk) << "nope";
  CHECK_THROWS_AS(read_tensor_file(junk), FormatError);
}

TEST_CASE("image/tensor conversion maps 255 to 1.0 and back") {
  ImageRGB img(2, 2);
  img.px[0] = 255;  // R of (0,0)
  img.px[4] = 128;  // G of (0,1)
  Tensor t = image_to_tensor(img);
  CHECK(t.at(0, 0, 0, 0) == doctest::Approx(1.0f));
  CHECK(t.at(0, 1, 0, 1) == doctest::Approx(128.0f / 255.0f));
  ImageRGB back = tensor_to_image(t);
  CHECK(back.px == img.px);
}
