#include <doctest.h>

#include <random>

#include "lkcell/activations.hpp"
#include "oracles.hpp"

using namespace lkcell;

TEST_CASE("relu clamps negatives and keeps positives") {
  Tensor in(1, 1, 1, 2);
  in.data = {-1.0f, 2.0f};
  Tensor out = relu(in);
  CHECK(out.data[0] == 0.0f);
  CHECK(out.data[1] == 2.0f);
}

TEST_CASE("gelu fixes zero and matches the erf-series oracle at 1") {
  Tensor in(1, 1, 1, 3);
  in.data = {0.0f, 1.0f, -0.5f};
  Tensor out = gelu(in);
  CHECK(out.data[0] == 0.0f);
  CHECK(out.data[1] == doctest::Approx(0.8413447f).epsilon(1e-6));
  CHECK(out.data[1] == doctest::Approx(oracles::gelu_scalar(1.0)).epsilon(1e-6));
  CHECK(out.data[2] == doctest::Approx(oracles::gelu_scalar(-0.5)).epsilon(1e-6));
}

TEST_CASE("tanh_map stays inside [-1, 1]") {
  std::mt19937 rng(2);
  Tensor in = oracles::random_tensor<float>(rng, 1, 2, 4, 4, -20.0f, 20.0f);
  Tensor out = tanh_map(in);
  for (float v : out.data) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  CHECK(out.data[0] == doctest::Approx(std::tanh(in.data[0])));
}

TEST_CASE("softmax_channels sums to one at every site and is order-preserving") {
  std::mt19937 rng(3);
  Tensor in = oracles::random_tensor<float>(rng, 2, 5, 3, 3, -4.0f, 4.0f);
  Tensor out = softmax_channels(in);
  for (int n = 0; n < 2; ++n) {
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 3; ++x) {
        float sum = 0.0f;
        for (int c = 0; c < 5; ++c) sum += out.at(n, c, y, x);
        CHECK(sum == doctest::Approx(1.0f).epsilon(1e-5));
        for (int a = 0; a < 5; ++a) {
          for (int b = 0; b < 5; ++b) {
            if (in.at(n, a, y, x) > in.at(n, b, y, x)) {
              CHECK(out.at(n, a, y, x) > out.at(n, b, y, x));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("activations reject non-finite input") {
  Tensor in(1, 1, 1, 1);
  in.data[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(relu(in), ValidationError);
  CHECK_THROWS_AS(gelu(in), ValidationError);
  CHECK_THROWS_AS(softmax_channels(in), ValidationError);
}
