#include "lkcell/render.hpp"

namespace lkcell {

GridB boundary_mask(const GridI& labels) {
  GridB out(labels.rows, labels.cols, 0);
  for (int y = 0; y < labels.rows; ++y) {
    for (int x = 0; x < labels.cols; ++x) {
      const int lb = labels.at(y, x);
      if (lb == 0) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy) {
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= labels.rows || nx < 0 || nx >= labels.cols) {
            edge = true;
          } else if (labels.at(ny, nx) != lb) {
            edge = true;
          }
        }
      }
      out.at(y, x) = edge;
    }
  }
  return out;
}

std::array<std::uint8_t, 3> class_color(int class_id) {
  switch (class_id) {
    case 1: return {255, 0, 0};    // neoplastic
    case 2: return {0, 200, 0};    // inflammatory
    case 3: return {0, 80, 255};   // connective
    case 4: return {255, 220, 0};  // dead
    case 5: return {255, 130, 0};  // epithelial
    default: return {255, 255, 255};
  }
}

ImageRGB render_overlay(const ImageRGB& base, const GridI& labels,
                        const std::map<int, int>& instance_classes) {
  if (base.rows != labels.rows || base.cols != labels.cols) {
    throw ShapeError("render_overlay: image (" + std::to_string(base.rows) + "," +
                     std::to_string(base.cols) + ") and mask (" +
                     std::to_string(labels.rows) + "," + std::to_string(labels.cols) +
                     ") disagree");
  }
  ImageRGB out = base;
  const GridB edges = boundary_mask(labels);
  for (int y = 0; y < labels.rows; ++y) {
    for (int x = 0; x < labels.cols; ++x) {
      if (!edges.at(y, x)) continue;
      const int lb = labels.at(y, x);
      auto it = instance_classes.find(lb);
      const auto color = class_color(it == instance_classes.end() ? 0 : it->second);
      const std::size_t p = out.index(y, x);
      out.px[p] = color[0];
      out.px[p + 1] = color[1];
      out.px[p + 2] = color[2];
    }
  }
  return out;
}

}  // namespace lkcell
