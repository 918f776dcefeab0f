#include <doctest.h>

#include <random>

#include "lkcell/lk_block.hpp"
#include "oracles.hpp"

using namespace lkcell;

namespace {

template <typename T>
ConvParamsT<T> dw_conv(int channels, int k, int dilation) {
  ConvParamsT<T> p;
  p.in_channels = p.out_channels = p.groups = channels;
  p.kernel_h = p.kernel_w = k;
  p.dilation = dilation;
  p.padding = dilation * (k - 1) / 2;
  p.weights.assign(p.weight_count(), T(0));
  return p;
}

template <typename T>
lkcell::BatchNormParamsT<T> random_bn_t(std::mt19937& rng, int c) {
  lkcell::BatchNormParamsT<T> bn;
  bn.gamma = oracles::random_vec<T>(rng, c, T(0.5), T(1.5));
  bn.beta = oracles::random_vec<T>(rng, c, T(-0.3), T(0.3));
  bn.running_mean = oracles::random_vec<T>(rng, c, T(-0.3), T(0.3));
  bn.running_var = oracles::random_vec<T>(rng, c, T(0.4), T(1.6));
  return bn;
}

template <typename T>
LKBlockT<T> random_block(std::mt19937& rng, int channels, int K,
                         std::vector<std::pair<int, int>> branches,
                         bool pointwise = true, bool activations = true) {
  LKBlockT<T> b;
  b.config.channels = channels;
  b.config.large_kernel = K;
  b.config.branches = branches;
  b.config.pre_pointwise = pointwise;
  b.config.post_pointwise = pointwise;
  b.activations_enabled = activations;

  b.large_conv = dw_conv<T>(channels, K, 1);
  b.large_conv.weights = oracles::random_vec<T>(rng, b.large_conv.weight_count());
  b.large_bn = random_bn_t<T>(rng, channels);
  for (auto [k, r] : branches) {
    DilatedBranchT<T> br;
    br.kernel_size = k;
    br.dilation = r;
    br.conv = dw_conv<T>(channels, k, r);
    br.conv.weights = oracles::random_vec<T>(rng, br.conv.weight_count());
    br.bn = random_bn_t<T>(rng, channels);
    b.branches.push_back(std::move(br));
  }
  if (pointwise) {
    b.entry_conv.in_channels = b.entry_conv.out_channels = channels;
    b.entry_conv.kernel_h = b.entry_conv.kernel_w = 1;
    b.entry_conv.weights = oracles::random_vec<T>(rng, b.entry_conv.weight_count());
    b.entry_bn = random_bn_t<T>(rng, channels);
    b.exit_conv = b.entry_conv;
    b.exit_conv.weights = oracles::random_vec<T>(rng, b.exit_conv.weight_count());
    b.exit_conv.bias = oracles::random_vec<T>(rng, channels);
  }
  return b;
}

template <typename T>
double max_dev(const TensorT<T>& a, const TensorT<T>& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("dw_kernel_footprint follows (2d-1)x(2d-1)") {
  CHECK(dw_kernel_footprint(1) == std::pair<int, int>{1, 1});
  CHECK(dw_kernel_footprint(2) == std::pair<int, int>{3, 3});
  CHECK(dw_kernel_footprint(7) == std::pair<int, int>{13, 13});
  CHECK_THROWS_AS(dw_kernel_footprint(0), DomainError);
}

TEST_CASE("reparam_footprint follows (2d-1)^2 * m * k^2") {
  CHECK(reparam_footprint(1, 1, 1) == 1);
  CHECK(reparam_footprint(2, 1, 3) == 81);
  CHECK(reparam_footprint(3, 2, 3) == 450);
  CHECK_THROWS_AS(reparam_footprint(0, 1, 1), DomainError);
  CHECK_THROWS_AS(reparam_footprint(1, 0, 1), DomainError);
}

TEST_CASE("dilated embedding places a 1x1 kernel at the center") {
  std::vector<float> dense = dilated_to_dense_kernel<float>({3.0f}, 1, 1, 5);
  REQUIRE(dense.size() == 25);
  for (int i = 0; i < 25; ++i) {
    CHECK(dense[i] == (i == 12 ? 3.0f : 0.0f));
  }
}

TEST_CASE("dilated embedding puts a 3x3 r=2 kernel on rows/cols 0,2,4 of K=5") {
  std::vector<float> taps(9);
  for (int i = 0; i < 9; ++i) taps[i] = static_cast<float>(i + 1);
  std::vector<float> dense = dilated_to_dense_kernel(taps, 3, 2, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      const float v = dense[y * 5 + x];
      if (y % 2 == 0 && x % 2 == 0) {
        CHECK(v == taps[(y / 2) * 3 + x / 2]);
      } else {
        CHECK(v == 0.0f);
      }
    }
  }
}

TEST_CASE("embedded taps read back exactly (injective on tap values)") {
  std::mt19937 rng(17);
  std::vector<float> taps = oracles::random_vec<float>(rng, 9);
  std::vector<float> dense = dilated_to_dense_kernel(taps, 3, 3, 7);
  const int offset = 3 - 3;  // (K-1)/2 - r*(k-1)/2 = 3 - 3
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      CHECK(dense[(offset + y * 3) * 7 + offset + x * 3] == taps[y * 3 + x]);
    }
  }
}

TEST_CASE("dense embedding convolves identically to the dilated original") {
  std::mt19937 rng(23);
  const int C = 2;
  Tensor in = oracles::random_tensor<float>(rng, 1, C, 10, 10);

  ConvParams dilated = dw_conv<float>(C, 3, 3);
  dilated.weights = oracles::random_vec<float>(rng, dilated.weight_count());

  ConvParams dense = dw_conv<float>(C, 7, 1);
  for (int c = 0; c < C; ++c) {
    std::vector<float> taps(dilated.weights.begin() + c * 9,
                            dilated.weights.begin() + (c + 1) * 9);
    std::vector<float> embedded = dilated_to_dense_kernel(taps, 3, 3, 7);
    std::copy(embedded.begin(), embedded.end(), dense.weights.begin() + c * 49);
  }

  const Tensor a = depthwise_conv2d(in, dilated);
  const Tensor b = depthwise_conv2d(in, dense);
  CHECK(max_dev(a, b) <= 1e-5);
}

TEST_CASE("embedding rejects kernels that overflow the target") {
  CHECK_THROWS_AS(dilated_to_dense_kernel<float>(std::vector<float>(9, 1.0f), 3, 3, 5),
                  ConfigError);
}

TEST_CASE("identity-constructed block passes input through") {
  const int C = 3, K = 5;
  LKBlockT<float> b;
  b.config.channels = C;
  b.config.large_kernel = K;
  b.config.branches = {{3, 1}};
  b.config.pre_pointwise = false;
  b.config.post_pointwise = false;
  b.activations_enabled = false;

  b.large_conv = dw_conv<float>(C, K, 1);
  for (int c = 0; c < C; ++c) b.large_conv.weights[c * K * K + (K * K) / 2] = 1.0f;
  b.large_bn = BatchNormParams::identity(C);
  DilatedBranch br;
  br.kernel_size = 3;
  br.dilation = 1;
  br.conv = dw_conv<float>(C, 3, 1);
  br.bn = BatchNormParams::identity(C);
  b.branches.push_back(br);

  std::mt19937 rng(29);
  Tensor in = oracles::random_tensor<float>(rng, 1, C, 8, 8);
  Tensor out = forward_multibranch(b, in);
  CHECK(max_dev(out, in) <= 1e-6);
}

TEST_CASE("zeroed large kernel with one central branch equals the plain small conv") {
  std::mt19937 rng(37);
  const int C = 2;
  ConvParams small = dw_conv<float>(C, 3, 1);
  small.weights = oracles::random_vec<float>(rng, small.weight_count());

  LKBlockT<float> b;
  b.config.channels = C;
  b.config.large_kernel = 7;
  b.config.branches = {{3, 1}};
  b.config.pre_pointwise = false;
  b.config.post_pointwise = false;
  b.activations_enabled = false;
  b.large_conv = dw_conv<float>(C, 7, 1);
  b.large_bn = BatchNormParams::identity(C);
  DilatedBranch br;
  br.kernel_size = 3;
  br.dilation = 1;
  br.conv = small;
  br.bn = BatchNormParams::identity(C);
  b.branches.push_back(br);

  Tensor in = oracles::random_tensor<float>(rng, 1, C, 9, 9);
  Tensor got = forward_multibranch(b, in);
  Tensor want = depthwise_conv2d(in, small);
  CHECK(max_dev(got, want) <= 1e-6);
}

TEST_CASE("multibranch forward equals the per-branch recomputation oracle") {
  std::mt19937 rng(43);
  const int C = 3;
  LKBlockT<float> b = random_block<float>(rng, C, 7, {{3, 1}, {3, 2}}, false, false);
  Tensor in = oracles::random_tensor<float>(rng, 2, C, 8, 8);

  Tensor got = forward_multibranch(b, in);

  // Oracle: recompute each path independently and sum.
  Tensor want = batchnorm_inference(depthwise_conv2d(in, b.large_conv), b.large_bn);
  for (const auto& br : b.branches) {
    Tensor part = batchnorm_inference(depthwise_conv2d(in, br.conv), br.bn);
    for (std::size_t i = 0; i < want.size(); ++i) want.data[i] += part.data[i];
  }
  CHECK(max_dev(got, want) <= 1e-6);
}

TEST_CASE("multibranch forward preserves input shape") {
  std::mt19937 rng(47);
  LKBlockT<float> b = random_block<float>(rng, 4, 13, {{5, 1}, {3, 2}, {3, 3}});
  Tensor in = oracles::random_tensor<float>(rng, 2, 4, 11, 15);
  Tensor out = forward_multibranch(b, in);
  CHECK(out.same_shape(in));
}

TEST_CASE("multibranch forward rejects channel mismatches") {
  std::mt19937 rng(53);
  LKBlockT<float> b = random_block<float>(rng, 4, 7, {});
  Tensor in = oracles::random_tensor<float>(rng, 1, 3, 8, 8);
  CHECK_THROWS_AS(forward_multibranch(b, in), ShapeError);
}

TEST_CASE("reparameterizing a branch-free block folds just the large conv") {
  std::mt19937 rng(59);
  LKBlockT<float> b = random_block<float>(rng, 2, 5, {}, false, false);
  FusedBlockT<float> f = reparameterize(b);
  ConvParams folded = fold_bn_into_conv(b.large_conv, b.large_bn);
  CHECK(f.fused_conv.weights == folded.weights);
  CHECK(f.fused_conv.bias == folded.bias);
}

TEST_CASE("two identical branches contribute twice the single-branch delta") {
  std::mt19937 rng(61);
  LKBlockT<float> one = random_block<float>(rng, 2, 7, {{3, 2}}, false, false);
  LKBlockT<float> two = one;
  two.config.branches.push_back(two.config.branches[0]);
  two.branches.push_back(two.branches[0]);

  FusedBlockT<float> base = reparameterize(one);
  FusedBlockT<float> doubled = reparameterize(two);
  ConvParams large_only = fold_bn_into_conv(one.large_conv, one.large_bn);

  for (std::size_t i = 0; i < base.fused_conv.weights.size(); ++i) {
    const float delta = base.fused_conv.weights[i] - large_only.weights[i];
    CHECK(doubled.fused_conv.weights[i] ==
          doctest::Approx(large_only.weights[i] + 2.0f * delta).epsilon(1e-5));
  }
}

TEST_CASE("fusion equivalence at 32-bit: K=13 with branches (5,1),(3,2),(3,3)") {
  std::mt19937 rng(67);
  const int C = 3;
  LKBlockT<float> b = random_block<float>(rng, C, 13, {{5, 1}, {3, 2}, {3, 3}});
  FusedBlockT<float> f = reparameterize(b);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Tensor in = oracles::random_tensor<float>(rng, 1, C, 16, 16);
    worst = std::max(worst, max_dev(forward_multibranch(b, in), forward_fused(f, in)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("fusion equivalence at 64-bit tightens to 1e-10") {
  std::mt19937 rng(71);
  const int C = 3;
  LKBlockT<double> b = random_block<double>(rng, C, 13, {{5, 1}, {3, 2}, {3, 3}});
  FusedBlockT<double> f = reparameterize(b);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor64 in = oracles::random_tensor<double>(rng, 1, C, 16, 16);
    worst = std::max(worst, max_dev(forward_multibranch(b, in), forward_fused(f, in)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("fusion equivalence holds across kernel sizes and branch counts") {
  std::mt19937 rng(73);
  const std::vector<std::vector<std::pair<int, int>>> branch_sets = {
      {},
      {{3, 1}},
      {{3, 1}, {3, 2}},
      {{5, 1}, {3, 2}, {3, 3}},
      {{5, 1}, {3, 2}, {3, 3}, {1, 1}},
  };
  for (int K : {7, 9, 13, 31}) {
    for (const auto& branches : branch_sets) {
      bool ok = true;
      for (auto [k, r] : branches) ok = ok && (k - 1) * r + 1 <= K;
      if (!ok) continue;
      LKBlockT<float> b = random_block<float>(rng, 2, K, branches);
      FusedBlockT<float> f = reparameterize(b);
      Tensor in = oracles::random_tensor<float>(rng, 1, 2, 20, 20);
      CHECK(max_dev(forward_multibranch(b, in), forward_fused(f, in)) <= 1e-4);
    }
  }
}

TEST_CASE("parameter accounting: fused core is branch-count independent") {
  std::mt19937 rng(79);
  const int C = 4, K = 9;
  for (const auto& branches : std::vector<std::vector<std::pair<int, int>>>{
           {}, {{3, 1}}, {{3, 1}, {3, 2}, {3, 3}}}) {
    LKBlockT<float> b = random_block<float>(rng, C, K, branches, false, false);
    FusedBlockT<float> f = reparameterize(b);
    CHECK(f.fused_conv.weights.size() == static_cast<std::size_t>(C) * K * K);
    CHECK(f.fused_conv.bias.size() == static_cast<std::size_t>(C));

    std::size_t multi_conv = b.large_conv.weights.size();
    std::size_t expected = static_cast<std::size_t>(C) * K * K;
    for (const auto& br : b.branches) {
      multi_conv += br.conv.weights.size();
      expected += static_cast<std::size_t>(C) * br.kernel_size * br.kernel_size;
    }
    CHECK(multi_conv == expected);
  }
}

TEST_CASE("block config validation enforces the per-branch extent constraint") {
  LKBlockConfig cfg;
  cfg.channels = 4;
  cfg.large_kernel = 7;
  cfg.branches = {{5, 2}};  // (5-1)*2+1 = 9 > 7
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.branches = {{5, 1}};  // extent 5 <= 7
  CHECK_NOTHROW(cfg.validate());
  cfg.large_kernel = 8;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
