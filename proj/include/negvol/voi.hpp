#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "negvol/grid.hpp"

namespace negvol {

/// Inclusive voxel index range on `geometry`.
struct BoundingBox {
  std::array<long, 3> min{0, 0, 0};
  std::array<long, 3> max{0, 0, 0};
  GridGeometry geometry;

  std::array<std::size_t, 3> extent() const;
  /// Throws Config unless min <= max and the box lies inside the grid.
  void validate() const;
  /// Voxel ranges plus world-mm ranges of the corner voxel centers.
  nlohmann::json to_json() const;
};

struct CoarseMaskOptions {
  /// Fixed threshold on min-max normalized intensity; the minimum method
  /// is used when unset. Ignored for probability maps.
  std::optional<double> bone_threshold;
  std::size_t min_component_voxels = 100;
  std::size_t histogram_bins = 256;
};

/// Probability map: minimum-method threshold. Raw intensity: min-max
/// normalization, then the fixed or minimum-method threshold. Both are then
/// opened with a radius-1 ball and stripped of small components. Throws
/// Degenerate when nothing survives.
BinaryMask coarse_mask_from_probability(const VoxelGrid& probability, const CoarseMaskOptions& options = {});
BinaryMask coarse_mask_from_intensity(const VoxelGrid& intensity, const CoarseMaskOptions& options = {});

/// Occupied bounds of `m` grown by `margin` voxels and clamped to the grid.
/// Throws Degenerate for an empty mask.
BoundingBox bounding_box(const BinaryMask& m, long margin = 0);

struct SplitResult {
  BoundingBox left;   // lower x
  BoundingBox right;  // higher x
  /// First and last empty x slice of the chosen gap.
  long gap_begin = 0;
  long gap_end = 0;
};

/// Splits at the widest empty gap of the x occupancy profile between
/// occupied slices. Boxes are the tight bounds of each side grown by
/// `margin` voxels, clamped to the grid and never crossing the middle of the
/// gap. Throws Degenerate when there is no interior gap.
SplitResult split_left_right(const BinaryMask& m, long margin = 8);

/// Per-axis ratio of target to source dims, for mapping boxes found on a
/// downsampled grid back to the full-resolution grid.
Vec3 box_scale(const GridGeometry& box_grid, const GridGeometry& target);

/// Sub-grid covered by `box` after scaling its cell range [min, max + 1) by
/// `scale` (min floored, max ceiled). Out-of-range corners are clamped and
/// noted in `warnings`. The crop keeps world positions: its origin is the
/// source world position of the first cropped voxel.
template <class T>
Grid<T> crop(const Grid<T>& g, const BoundingBox& box, const Vec3& scale = Vec3::Ones(),
             std::vector<std::string>* warnings = nullptr);

/// Writes `sub` back into `into` with its voxel (0,0,0) at `at`.
template <class T>
void embed(const Grid<T>& sub, Grid<T>& into, const std::array<long, 3>& at);

/// Box on `g` that crop() would use, after scaling and clamping.
BoundingBox scaled_box(const BoundingBox& box, const GridGeometry& g, const Vec3& scale,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace negvol
