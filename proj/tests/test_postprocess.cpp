#include <doctest.h>

#include <random>

#include "lkcell/postprocess.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace lkcell;

namespace {

GridF random_grid(std::mt19937& rng, int rows, int cols, float lo = -1.0f,
                  float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  GridF g(rows, cols);
  for (auto& v : g.v) v = dist(rng);
  return g;
}

SegmentationOutput random_output(std::mt19937& rng, int rows, int cols,
                                 int num_classes = 3) {
  SegmentationOutput out;
  out.np_map = Tensor(1, 2, rows, cols);
  out.hv_map = Tensor(1, 2, rows, cols);
  out.nt_map = Tensor(1, num_classes + 1, rows, cols);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f), sym(-1.0f, 1.0f);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const float p = unit(rng);
      out.np_map.at(0, 1, y, x) = p;
      out.np_map.at(0, 0, y, x) = 1.0f - p;
      out.hv_map.at(0, 0, y, x) = sym(rng);
      out.hv_map.at(0, 1, y, x) = sym(rng);
      float sum = 0.0f;
      for (int c = 0; c <= num_classes; ++c) {
        const float v = unit(rng) + 1e-3f;
        out.nt_map.at(0, c, y, x) = v;
        sum += v;
      }
      for (int c = 0; c <= num_classes; ++c) out.nt_map.at(0, c, y, x) /= sum;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("sobel of a constant map is all zeros") {
  GridF m(8, 8, 3.7f);
  auto [gx, gy] = sobel_gradient(m);
  for (float v : gx.v) CHECK(v == 0.0f);
  for (float v : gy.v) CHECK(v == 0.0f);
}

TEST_CASE("sobel of a horizontal ramp: gy zero, gx positive interior") {
  GridF m(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) m.at(y, x) = static_cast<float>(x);
  }
  auto [gx, gy] = sobel_gradient(m);
  for (float v : gy.v) CHECK(v == 0.0f);
  for (int y = 1; y < 7; ++y) {
    for (int x = 1; x < 7; ++x) CHECK(gx.at(y, x) > 0.0f);
  }
}

TEST_CASE("sobel matches the direct-summation oracle exactly") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    GridF m = random_grid(rng, 9 + trial, 12);
    auto [gx, gy] = sobel_gradient(m);
    auto [ox, oy] = oracles::naive_sobel(m);
    CHECK(gx.v == ox.v);
    CHECK(gy.v == oy.v);
  }
}

TEST_CASE("sobel rejects degenerate grids") {
  CHECK_THROWS_AS(sobel_gradient(GridF(2, 8)), ShapeError);
}

TEST_CASE("all-background probability map yields nothing downstream") {
  PostprocessParams params;
  GridF np(16, 16, 0.0f), h(16, 16, 0.0f), v(16, 16, 0.0f);
  EnergyMaps maps = compute_energy(np, h, v, params);
  for (auto b : maps.foreground.v) CHECK(!b);
  for (auto b : maps.markers.v) CHECK(!b);
  GridI labels = watershed(maps.markers, maps.energy, maps.foreground);
  for (int lb : labels.v) CHECK(lb == 0);
}

TEST_CASE("a single HV cone produces exactly one marker component") {
  auto scene = scenes::disc_scene(20, 20, {{10, 10, 6, 1}});
  PostprocessParams params;
  EnergyMaps maps = compute_energy(channel_plane(scene.np_map, 0, 1),
                                   channel_plane(scene.hv_map, 0, 0),
                                   channel_plane(scene.hv_map, 0, 1), params);
  GridI comp = oracles::cc_union_find(maps.markers);
  int n = 0;
  for (int v : comp.v) n = std::max(n, v);
  CHECK(n == 1);
}

TEST_CASE("two separated discs produce two marker components") {
  auto scene = scenes::disc_scene(20, 30, {{10, 7, 5, 1}, {10, 22, 5, 2}});
  PostprocessParams params;
  EnergyMaps maps = compute_energy(channel_plane(scene.np_map, 0, 1),
                                   channel_plane(scene.hv_map, 0, 0),
                                   channel_plane(scene.hv_map, 0, 1), params);
  GridI comp = oracles::cc_union_find(maps.markers);
  int n = 0;
  for (int v : comp.v) n = std::max(n, v);
  CHECK(n == 2);
}

TEST_CASE("one marker covering the whole foreground labels it as one instance") {
  GridB fg(10, 10, 0);
  for (int y = 2; y < 8; ++y) {
    for (int x = 2; x < 8; ++x) fg.at(y, x) = 1;
  }
  GridF energy(10, 10, -0.5f);
  GridI labels = watershed(fg, energy, fg);  // markers == foreground
  for (std::size_t i = 0; i < fg.v.size(); ++i) {
    CHECK((labels.v[i] > 0) == (fg.v[i] != 0));
  }
  int mx = 0;
  for (int v : labels.v) mx = std::max(mx, v);
  CHECK(mx == 1);
}

TEST_CASE("markers equal to foreground come back unchanged as components") {
  GridB fg(12, 12, 0);
  for (int y = 1; y < 4; ++y) {
    for (int x = 1; x < 4; ++x) fg.at(y, x) = 1;
  }
  for (int y = 7; y < 11; ++y) {
    for (int x = 6; x < 10; ++x) fg.at(y, x) = 1;
  }
  GridF energy(12, 12, -0.3f);
  GridI labels = watershed(fg, energy, fg);
  GridI want = oracles::cc_union_find(fg);
  CHECK(scenes::same_partition(labels, want));
}

TEST_CASE("no markers at all: each foreground component becomes one instance") {
  GridB fg(10, 14, 0);
  for (int x = 1; x < 5; ++x) fg.at(2, x) = 1;
  for (int x = 8; x < 13; ++x) fg.at(7, x) = 1;
  GridB markers(10, 14, 0);
  GridF energy(10, 14, -0.4f);
  GridI labels = watershed(markers, energy, fg);
  GridI want = oracles::cc_union_find(fg);
  CHECK(scenes::same_partition(labels, want));
}

TEST_CASE("watershed rejects markers outside the foreground") {
  GridB markers(5, 5, 0), fg(5, 5, 0);
  markers.at(2, 2) = 1;
  GridF energy(5, 5, 0.0f);
  CHECK_THROWS_AS(watershed(markers, energy, fg), ValidationError);
}

TEST_CASE("touching nuclei split along the ridge like the minimax oracle") {
  // Asymmetric radii and a vertical offset keep minimax costs tie-free.
  const std::vector<scenes::Disc> discs = {{11, 7, 6, 1}, {12, 17, 5, 3}};
  auto scene = scenes::disc_scene(24, 24, discs);
  PostprocessParams params;
  const GridF np = channel_plane(scene.np_map, 0, 1);
  const GridF h = channel_plane(scene.hv_map, 0, 0);
  const GridF v = channel_plane(scene.hv_map, 0, 1);
  EnergyMaps maps = compute_energy(np, h, v, params);

  // The discs overlap into one foreground blob with two markers.
  GridI fg_comp = oracles::cc_union_find(maps.foreground);
  int fg_n = 0;
  for (int c : fg_comp.v) fg_n = std::max(fg_n, c);
  REQUIRE(fg_n == 1);
  GridI marker_comp = oracles::cc_union_find(maps.markers);
  int mk_n = 0;
  for (int c : marker_comp.v) mk_n = std::max(mk_n, c);
  REQUIRE(mk_n == 2);

  GridI labels = watershed(maps.markers, maps.energy, maps.foreground);
  int inst = 0;
  for (int lb : labels.v) inst = std::max(inst, lb);
  CHECK(inst == 2);

  auto oracle = oracles::minimax_assignment(maps.markers, maps.energy,
                                            maps.foreground);
  REQUIRE(!oracle.had_ties);
  CHECK(scenes::same_partition(labels, oracle.labels));
}

TEST_CASE("majority vote follows summed probabilities and the tie rule") {
  GridI labels(3, 5, 0);
  Tensor nt(1, 6, 3, 5);

  // Instance 1: all weight on class 2.
  labels.at(0, 0) = 1;
  labels.at(0, 1) = 1;
  nt.at(0, 2, 0, 0) = 1.0f;
  nt.at(0, 2, 0, 1) = 1.0f;

  // Instance 2: three pixels vote class 1, two vote class 4.
  for (int x = 0; x < 5; ++x) labels.at(1, x) = 2;
  nt.at(0, 1, 1, 0) = 1.0f;
  nt.at(0, 1, 1, 1) = 1.0f;
  nt.at(0, 1, 1, 2) = 1.0f;
  nt.at(0, 4, 1, 3) = 1.0f;
  nt.at(0, 4, 1, 4) = 1.0f;

  // Instance 3: uniform probabilities across all classes.
  for (int x = 0; x < 5; ++x) {
    labels.at(2, x) = 3;
    for (int c = 0; c < 6; ++c) nt.at(0, c, 2, x) = 1.0f / 6.0f;
  }

  const auto classes = majority_vote(labels, nt);
  CHECK(classes.at(1) == 2);
  CHECK(classes.at(2) == 1);
  CHECK(classes.at(3) == 1);  // tie -> lowest nucleus class
}

TEST_CASE("instance_segment on an all-background output returns zero instances") {
  SegmentationOutput out;
  out.np_map = Tensor(1, 2, 16, 16);
  out.hv_map = Tensor(1, 2, 16, 16);
  out.nt_map = Tensor(1, 6, 16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      out.np_map.at(0, 0, y, x) = 1.0f;
      out.nt_map.at(0, 0, y, x) = 1.0f;
    }
  }
  InstanceSegmentation seg = instance_segment(out, PostprocessParams{});
  CHECK(seg.num_instances() == 0);
  seg.validate();
}

TEST_CASE("the analytic two-nuclei scene yields two instances with their classes") {
  const std::vector<scenes::Disc> discs = {{10, 7, 6, 2}, {11, 20, 5, 5}};
  auto scene = scenes::disc_scene(22, 28, discs);
  InstanceSegmentation seg = instance_segment(scene, PostprocessParams{});
  seg.validate();
  REQUIRE(seg.num_instances() == 2);

  // Map each instance to the disc owning its first pixel.
  GridI owner = scenes::disc_ownership(22, 28, discs);
  std::map<int, int> inst_to_disc;
  for (std::size_t i = 0; i < owner.v.size(); ++i) {
    const int lb = seg.label_map.v[i];
    if (lb > 0 && owner.v[i] > 0) inst_to_disc.emplace(lb, owner.v[i]);
  }
  for (const auto& [lb, disc] : inst_to_disc) {
    CHECK(seg.instance_classes.at(lb) == discs[disc - 1].cls);
  }
}

TEST_CASE("re-running on the rasterized result reproduces the partition") {
  const std::vector<scenes::Disc> discs = {{8, 8, 5, 1}, {18, 20, 5, 4}};
  auto scene = scenes::disc_scene(26, 28, discs);
  InstanceSegmentation first = instance_segment(scene, PostprocessParams{});
  REQUIRE(first.num_instances() == 2);

  auto rebuilt = scenes::rasterize(first);
  InstanceSegmentation second = instance_segment(rebuilt, PostprocessParams{});
  CHECK(scenes::same_partition(first.label_map, second.label_map));
  CHECK(first.instance_classes.size() == second.instance_classes.size());
}

TEST_CASE("partition law, contiguity, and determinism on fuzzed outputs") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    SegmentationOutput out = random_output(rng, 24, 24);
    PostprocessParams params;
    InstanceSegmentation a = instance_segment(out, params);
    a.validate();

    // label > 0 exactly on the recomputed foreground.
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        const bool fg = out.np_map.at(0, 1, y, x) > params.np_threshold;
        CHECK((a.label_map.at(y, x) > 0) == fg);
      }
    }

    InstanceSegmentation b = instance_segment(out, params);
    CHECK(a.label_map.v == b.label_map.v);
    CHECK(a.instance_classes == b.instance_classes);
  }
}

TEST_CASE("marker pixel set grows monotonically with the threshold") {
  std::mt19937 rng(79);
  auto scene = scenes::disc_scene(24, 24, {{12, 8, 6, 1}, {12, 17, 5, 2}});
  const GridF np = channel_plane(scene.np_map, 0, 1);
  const GridF h = channel_plane(scene.hv_map, 0, 0);
  const GridF v = channel_plane(scene.hv_map, 0, 1);

  GridB prev(24, 24, 0);
  for (float t : {0.1f, 0.25f, 0.4f, 0.6f, 0.8f}) {
    PostprocessParams params;
    params.marker_threshold = t;
    EnergyMaps maps = compute_energy(np, h, v, params);
    for (std::size_t i = 0; i < prev.v.size(); ++i) {
      if (prev.v[i]) CHECK(maps.markers.v[i]);
    }
    prev = maps.markers;
  }
}

TEST_CASE("postprocess params validation") {
  PostprocessParams p;
  p.np_threshold = 0.0f;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = PostprocessParams{};
  p.marker_threshold = 1.0f;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = PostprocessParams{};
  p.min_instance_size = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
