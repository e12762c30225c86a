#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "negvol/grid.hpp"

namespace negvol {

/// Ball is the set of integer offsets with |d|^2 <= r^2 (radius 1 is the
/// 6-neighborhood plus center); cube is the (2r+1)^3 block. Both are
/// symmetric under offset negation.
struct StructuringElement {
  enum class Shape { Ball, Cube };

  Shape shape = Shape::Ball;
  int radius = 1;

  static StructuringElement ball(int r) { return {Shape::Ball, r}; }
  static StructuringElement cube(int r) { return {Shape::Cube, r}; }

  std::vector<std::array<int, 3>> offsets() const;
};

// Voxels outside the grid count as false.
BinaryMask erode(const BinaryMask& m, const StructuringElement& se);
BinaryMask dilate(const BinaryMask& m, const StructuringElement& se);
BinaryMask close(const BinaryMask& m, const StructuringElement& se);
BinaryMask open(const BinaryMask& m, const StructuringElement& se);

/// 26-connected component labeling. Labels are 1-based in first-visit
/// (storage) order; 0 is background. sizes[l] is the voxel count of label l
/// (sizes[0] unused).
struct ComponentLabels {
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> sizes;

  std::size_t component_count() const { return sizes.empty() ? 0 : sizes.size() - 1; }
  /// Label with the most voxels (lowest label on ties); 0 when empty.
  std::uint32_t largest() const;
};

ComponentLabels label_components(const BinaryMask& m);

/// Clears 26-connected components smaller than min_voxels. The largest
/// component always survives.
BinaryMask remove_small_components(const BinaryMask& m, std::size_t min_voxels);

/// Only the largest 26-connected component (empty stays empty).
BinaryMask largest_component(const BinaryMask& m);

}  // namespace negvol
