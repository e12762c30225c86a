#pragma once

#include "negvol/grid.hpp"

namespace negvol {

/// Signed Euclidean distance (mm), negative inside the mask.
///
/// Exact squared distances between voxel centers come from the separable
/// lower-envelope transform; each voxel then gets
///   outside:  d(v, nearest true center)  - h
///   inside: -(d(v, nearest false center) - h)
/// with h = half the smallest spacing, so the zero level sits on the voxel
/// faces between the two classes.
VoxelGrid distance_field(const BinaryMask& m);

/// Unsigned distance (mm) from each voxel center to the nearest voxel center
/// where `target` is true. Infinity when target is empty.
VoxelGrid distance_to(const BinaryMask& target);

/// Trilinear interpolation at a world point; positions off the grid are
/// clamped to the border.
double sample_trilinear(const VoxelGrid& g, const Vec3& p);

}  // namespace negvol
