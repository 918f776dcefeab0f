#include "lkcell/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

namespace lkcell {

namespace {

constexpr int kNeighborY[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr int kNeighborX[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

// Scales into [-1, 1] by the peak magnitude, keeping zero at zero so that
// flat regions stay gradient-free; a constant map normalizes to all zeros.
void peak_normalize(GridF& g) {
  float peak = 0.0f;
  for (float v : g.v) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0f) return;
  for (float& v : g.v) v /= peak;
}

// Relabels positive labels to contiguous 1..N in order of first (row-major)
// appearance.
void relabel_contiguous(GridI& labels) {
  std::map<int, int> remap;
  int next = 1;
  for (auto& v : labels.v) {
    if (v <= 0) continue;
    auto [it, inserted] = remap.emplace(v, next);
    if (inserted) ++next;
    v = it->second;
  }
}

}  // namespace

void PostprocessParams::validate() const {
  if (!(np_threshold > 0.0f && np_threshold < 1.0f)) {
    throw ConfigError("postprocess: np_threshold must lie in (0,1)");
  }
  if (!(marker_threshold > 0.0f && marker_threshold < 1.0f)) {
    throw ConfigError("postprocess: marker_threshold must lie in (0,1)");
  }
  if (min_instance_size < 1) {
    throw ConfigError("postprocess: min_instance_size must be >= 1");
  }
}

void InstanceSegmentation::validate() const {
  std::map<int, int> counts;
  for (int v : label_map.v) {
    if (v < 0) throw ValidationError("instance segmentation: negative label");
    if (v > 0) ++counts[v];
  }
  const int n = counts.empty() ? 0 : counts.rbegin()->first;
  if (static_cast<int>(counts.size()) != n) {
    throw ValidationError("instance segmentation: label ids not contiguous 1..N");
  }
  if (counts != instance_sizes) {
    throw ValidationError("instance segmentation: instance_sizes disagree with "
                          "label_map");
  }
  for (const auto& [label, cls] : instance_classes) {
    if (!counts.count(label)) {
      throw ValidationError("instance segmentation: class entry for unknown label " +
                            std::to_string(label));
    }
  }
  // Connectivity: each instance must be one 8-connected component.
  for (const auto& [lb, size] : instance_sizes) {
    GridB mask(label_map.rows, label_map.cols, 0);
    for (std::size_t i = 0; i < label_map.v.size(); ++i) mask.v[i] = label_map.v[i] == lb;
    GridI sub = connected_components(mask);
    int max_comp = 0;
    for (int v : sub.v) max_comp = std::max(max_comp, v);
    if (max_comp != 1) {
      throw ValidationError("instance segmentation: label " + std::to_string(lb) +
                            " splits into " + std::to_string(max_comp) +
                            " 8-connected components");
    }
  }
}

std::pair<GridF, GridF> sobel_gradient(const GridF& map) {
  if (map.rows < 3 || map.cols < 3) {
    throw ShapeError("sobel_gradient: grid must be at least 3x3, got (" +
                     std::to_string(map.rows) + "," + std::to_string(map.cols) + ")");
  }
  static const int sx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const int sy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

  GridF gx(map.rows, map.cols), gy(map.rows, map.cols);
  for (int y = 0; y < map.rows; ++y) {
    for (int x = 0; x < map.cols; ++x) {
      float ax = 0.0f, ay = 0.0f;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = std::clamp(y + dy, 0, map.rows - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = std::clamp(x + dx, 0, map.cols - 1);
          const float v = map.at(yy, xx);
          ax += v * sx[dy + 1][dx + 1];
          ay += v * sy[dy + 1][dx + 1];
        }
      }
      gx.at(y, x) = ax;
      gy.at(y, x) = ay;
    }
  }
  peak_normalize(gx);
  peak_normalize(gy);
  return {gx, gy};
}

EnergyMaps compute_energy(const GridF& np_prob, const GridF& h_map, const GridF& v_map,
                          const PostprocessParams& params) {
  params.validate();
  if (!np_prob.same_shape(h_map) || !np_prob.same_shape(v_map)) {
    throw ShapeError("compute_energy: np/h/v grids disagree on shape");
  }

  auto [gx_h, gy_h] = sobel_gradient(h_map);
  auto [gx_v, gy_v] = sobel_gradient(v_map);
  (void)gy_h;
  (void)gx_v;

  EnergyMaps maps;
  maps.foreground = GridB(np_prob.rows, np_prob.cols, 0);
  maps.energy = GridF(np_prob.rows, np_prob.cols, 0.0f);
  GridB marker_mask(np_prob.rows, np_prob.cols, 0);

  for (std::size_t i = 0; i < np_prob.v.size(); ++i) {
    const bool fg = np_prob.v[i] > params.np_threshold;
    maps.foreground.v[i] = fg;
    const float s = std::max(std::fabs(gx_h.v[i]), std::fabs(gy_v.v[i]));
    if (fg) {
      maps.energy.v[i] = -(1.0f - s);
      marker_mask.v[i] = s < params.marker_threshold;
    }
  }

  // Drop marker components below the size floor.
  GridI comp = connected_components(marker_mask);
  std::map<int, int> comp_size;
  for (int v : comp.v) {
    if (v > 0) ++comp_size[v];
  }
  maps.markers = GridB(np_prob.rows, np_prob.cols, 0);
  for (std::size_t i = 0; i < comp.v.size(); ++i) {
    const int c = comp.v[i];
    maps.markers.v[i] = c > 0 && comp_size[c] >= params.min_instance_size;
  }
  return maps;
}

GridI connected_components(const GridB& mask) {
  GridI labels(mask.rows, mask.cols, 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.rows; ++y) {
    for (int x = 0; x < mask.cols; ++x) {
      if (!mask.at(y, x) || labels.at(y, x) != 0) continue;
      ++next;
      labels.at(y, x) = next;
      stack.push_back({y, x});
      while (!stack.empty()) {
        auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 8; ++k) {
          const int ny = cy + kNeighborY[k];
          const int nx = cx + kNeighborX[k];
          if (ny < 0 || ny >= mask.rows || nx < 0 || nx >= mask.cols) continue;
          if (!mask.at(ny, nx) || labels.at(ny, nx) != 0) continue;
          labels.at(ny, nx) = next;
          stack.push_back({ny, nx});
        }
      }
    }
  }
  return labels;
}

GridI watershed(const GridB& markers, const GridF& energy, const GridB& foreground) {
  if (!markers.same_shape(energy) || !markers.same_shape(foreground)) {
    throw ShapeError("watershed: input grids disagree on shape");
  }
  for (std::size_t i = 0; i < markers.v.size(); ++i) {
    if (markers.v[i] && !foreground.v[i]) {
      throw ValidationError("watershed: markers must be a subset of the foreground");
    }
  }

  GridI labels = connected_components(markers);

  // Priority order: energy, then row-major pixel index, then insertion order.
  struct QueueEntry {
    float energy;
    std::size_t pixel;
    std::uint64_t seq;
    int label;
    bool operator>(const QueueEntry& o) const {
      if (energy != o.energy) return energy > o.energy;
      if (pixel != o.pixel) return pixel > o.pixel;
      return seq > o.seq;
    }
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> pq;
  std::uint64_t seq = 0;

  const int rows = markers.rows, cols = markers.cols;
  auto push_neighbors = [&](int y, int x, int label) {
    for (int k = 0; k < 8; ++k) {
      const int ny = y + kNeighborY[k];
      const int nx = x + kNeighborX[k];
      if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
      const std::size_t idx = labels.index(ny, nx);
      if (!foreground.v[idx] || labels.v[idx] != 0) continue;
      pq.push({energy.v[idx], idx, seq++, label});
    }
  };

  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const int lb = labels.at(y, x);
      if (lb > 0) push_neighbors(y, x, lb);
    }
  }
  while (!pq.empty()) {
    const QueueEntry e = pq.top();
    pq.pop();
    if (labels.v[e.pixel] != 0) continue;
    labels.v[e.pixel] = e.label;
    const int y = static_cast<int>(e.pixel / cols);
    const int x = static_cast<int>(e.pixel % cols);
    push_neighbors(y, x, e.label);
  }

  // Foreground components with no marker stay unlabeled by the flood; each
  // becomes one instance so that labels partition the foreground.
  GridB orphan(rows, cols, 0);
  bool any_orphan = false;
  for (std::size_t i = 0; i < labels.v.size(); ++i) {
    if (foreground.v[i] && labels.v[i] == 0) {
      orphan.v[i] = 1;
      any_orphan = true;
    }
  }
  if (any_orphan) {
    GridI extra = connected_components(orphan);
    int base = 0;
    for (int v : labels.v) base = std::max(base, v);
    for (std::size_t i = 0; i < labels.v.size(); ++i) {
      if (extra.v[i] > 0) labels.v[i] = base + extra.v[i];
    }
  }

  relabel_contiguous(labels);
  return labels;
}

std::map<int, int> majority_vote(const GridI& label_map, const Tensor& nt_map,
                                 int batch_index) {
  if (nt_map.height != label_map.rows || nt_map.width != label_map.cols) {
    throw ShapeError("majority_vote: nt map " + nt_map.shape_str() +
                     " does not cover a (" + std::to_string(label_map.rows) + "," +
                     std::to_string(label_map.cols) + ") label map");
  }
  if (nt_map.channels < 2) {
    throw ShapeError("majority_vote: nt map needs background + >=1 class channels");
  }
  const int num_classes = nt_map.channels - 1;

  std::map<int, std::vector<double>> votes;
  for (int y = 0; y < label_map.rows; ++y) {
    for (int x = 0; x < label_map.cols; ++x) {
      const int lb = label_map.at(y, x);
      if (lb == 0) continue;
      auto& acc = votes.try_emplace(lb, std::vector<double>(num_classes, 0.0))
                      .first->second;
      for (int c = 1; c <= num_classes; ++c) {
        acc[c - 1] += nt_map.at(batch_index, c, y, x);
      }
    }
  }

  std::map<int, int> classes;
  for (const auto& [lb, acc] : votes) {
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
      if (acc[c] > acc[best]) best = c;
    }
    classes[lb] = best + 1;
  }
  return classes;
}

InstanceSegmentation instance_segment(const SegmentationOutput& output,
                                      const PostprocessParams& params,
                                      int batch_index) {
  if (output.np_map.channels != 2 || output.hv_map.channels != 2) {
    throw ShapeError("instance_segment: np and hv maps must have 2 channels");
  }
  if (!output.np_map.same_shape(output.hv_map) ||
      output.np_map.height != output.nt_map.height ||
      output.np_map.width != output.nt_map.width) {
    throw ShapeError("instance_segment: output maps disagree on spatial dims");
  }

  const GridF np_prob = channel_plane(output.np_map, batch_index, 1);
  const GridF h_map = channel_plane(output.hv_map, batch_index, 0);
  const GridF v_map = channel_plane(output.hv_map, batch_index, 1);

  EnergyMaps maps = compute_energy(np_prob, h_map, v_map, params);

  InstanceSegmentation seg;
  seg.label_map = watershed(maps.markers, maps.energy, maps.foreground);
  for (int v : seg.label_map.v) {
    if (v > 0) ++seg.instance_sizes[v];
  }
  seg.instance_classes = majority_vote(seg.label_map, output.nt_map, batch_index);
  return seg;
}

}  // namespace lkcell
