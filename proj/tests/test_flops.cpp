#include <doctest.h>

#include <random>

#include "lkcell/flops.hpp"
#include "oracles.hpp"

using namespace lkcell;

TEST_CASE("conv MAC closed forms") {
  // dense 3x3, 3 -> 8 channels, 32x32 output
  CHECK(conv_macs(8, 3, 3, 3, 32, 32) == 221184);
  // depthwise 13x13, 64 channels, 16x16 output
  CHECK(conv_macs(64, 1, 13, 13, 16, 16) == 2768896);
}

TEST_CASE("analyzer totals equal the spreadsheet oracle across configs") {
  std::mt19937 rng(101);
  std::vector<NetworkConfig> configs;
  configs.push_back(NetworkConfig::named("toy"));
  configs.push_back(NetworkConfig::named("lkcell-b"));
  configs.push_back(NetworkConfig::named("lkcell-l"));
  std::uniform_int_distribution<int> d_depth(1, 4), d_chan(1, 6), d_classes(2, 6);
  while (configs.size() < 20) {
    NetworkConfig cfg;
    cfg.name = "fuzz";
    for (int i = 0; i < 4; ++i) {
      cfg.stage_depths[i] = d_depth(rng);
      cfg.stage_channels[i] = 2 * d_chan(rng) + 2;
    }
    cfg.num_classes = d_classes(rng);
    configs.push_back(cfg);
  }

  for (const auto& cfg : configs) {
    for (bool fused : {false, true}) {
      const auto got = network_cost(cfg, 64, 64, fused);
      const auto want = oracles::flops_oracle(cfg, 64, 64, fused);
      CHECK(got.total_params == want.params);
      CHECK(got.total_flops == want.flops);
    }
  }
}

TEST_CASE("fused form strictly cheaper whenever branches exist") {
  for (const char* name : {"toy", "lkcell-b", "lkcell-l"}) {
    const NetworkConfig cfg = NetworkConfig::named(name);
    REQUIRE(!cfg.branches.empty());
    CHECK(count_flops(cfg, 64, 64, true) < count_flops(cfg, 64, 64, false));
    CHECK(count_params(cfg, true) < count_params(cfg, false));
  }
}

TEST_CASE("analytic params equal the built network's actual tensor sizes") {
  for (const char* name : {"toy", "lkcell-b"}) {
    const NetworkConfig cfg = NetworkConfig::named(name);
    Network net = build_network_structure(cfg);
    CHECK(count_params(net) == count_params(cfg, false));
    Network fused = reparameterize_network(net);
    CHECK(count_params(fused) == count_params(cfg, true));
  }
}

TEST_CASE("cost report layer rows sum to the totals") {
  const auto report = network_cost(NetworkConfig::named("toy"), 64, 64, false);
  std::uint64_t p = 0, f = 0;
  for (const auto& l : report.layers) {
    p += l.params;
    f += l.flops;
  }
  CHECK(p == report.total_params);
  CHECK(f == report.total_flops);
  CHECK(report.layers.front().name == "stem");
}

TEST_CASE("cost analyzer rejects bad sizes") {
  CHECK_THROWS_AS(network_cost(NetworkConfig::named("toy"), 60, 64, false),
                  ShapeError);
}
