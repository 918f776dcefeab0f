#pragma once

#include <map>
#include <utility>

#include "lkcell/network.hpp"
#include "lkcell/tensor.hpp"

namespace lkcell {

struct PostprocessParams {
  float np_threshold = 0.5f;      // nucleus probability above -> foreground
  float marker_threshold = 0.4f;  // gradient magnitude below -> marker interior
  int min_instance_size = 10;     // marker components smaller than this dropped

  void validate() const;
};

// Instance label map plus per-instance metadata. Labels are contiguous
// 1..N with 0 = background; every instance's pixel set is 8-connected.
struct InstanceSegmentation {
  GridI label_map;
  std::map<int, int> instance_classes;  // label -> class id (1..num_classes)
  std::map<int, int> instance_sizes;    // label -> pixel count

  int num_instances() const { return static_cast<int>(instance_sizes.size()); }
  void validate() const;
};

// 3x3 Sobel responses of a scalar map with replicate border padding, each
// normalized into [-1, 1] by its peak magnitude (sign and zeros preserved;
// all zeros for a constant map). Returns (gx, gy).
std::pair<GridF, GridF> sobel_gradient(const GridF& map);

struct EnergyMaps {
  GridF energy;     // -(1 - S) on foreground, 0 elsewhere
  GridB markers;    // surviving marker-component pixels
  GridB foreground; // np probability above threshold
};

// S = max(|sobel_x(h)|, |sobel_y(v)|); markers are 8-connected components of
// foreground pixels with S below the marker threshold, minus components
// smaller than min_instance_size.
EnergyMaps compute_energy(const GridF& np_prob, const GridF& h_map, const GridF& v_map,
                          const PostprocessParams& params);

// Marker-controlled watershed: labels marker components in row-major
// discovery order, then floods foreground pixels lowest-energy-first
// (ties: row-major pixel index, then insertion order). Foreground components
// containing no marker become one instance each, so labels cover the
// foreground exactly. Labels are relabeled contiguous 1..N at the end.
GridI watershed(const GridB& markers, const GridF& energy, const GridB& foreground);

// Per-instance argmax of summed type probabilities over channels
// 1..num_classes (channel 0 = background is excluded); ties go to the lowest
// class id.
std::map<int, int> majority_vote(const GridI& label_map, const Tensor& nt_map,
                                 int batch_index = 0);

// Full pipeline for one image of a SegmentationOutput batch.
InstanceSegmentation instance_segment(const SegmentationOutput& output,
                                      const PostprocessParams& params,
                                      int batch_index = 0);

// 8-connected components of a boolean mask, labeled 1..N in row-major
// discovery order.
GridI connected_components(const GridB& mask);

}  // namespace lkcell
