#pragma once

#include <array>
#include <map>

#include "lkcell/image_io.hpp"
#include "lkcell/tensor.hpp"

namespace lkcell {

// Instance boundary pixels: members of an instance with at least one
// 8-neighbor carrying a different label (out-of-bounds counts as background).
GridB boundary_mask(const GridI& labels);

// Fixed, deterministic color per class id (1..5 follow the nucleus classes,
// anything else falls back to white).
std::array<std::uint8_t, 3> class_color(int class_id);

// Recolors each instance's boundary pixels with its class color over a copy
// of the base image.
ImageRGB render_overlay(const ImageRGB& base, const GridI& labels,
                        const std::map<int, int>& instance_classes);

}  // namespace lkcell
