#pragma once

#include "negvol/grid.hpp"
#include "negvol/mesh.hpp"

namespace negvol {

struct SurfaceOptions {
  /// Iso level in (0,1) applied to the (optionally smoothed) 0/1 mask.
  double iso = 0.5;
  /// Gaussian pre-smoothing of the mask in voxels; 0 disables it. Smoothing
  /// only slides vertices along their cell edges, never changes topology.
  double smooth_sigma_voxels = 0.7;
};

/// Marching cubes over a scalar field; voxels with value > iso are inside.
/// Cells beyond the grid count as outside, so the result is always closed.
/// Ambiguous faces keep inside corners apart, the same rule on both sides
/// of every face, which makes the output a consistently oriented 2-manifold.
TriangleMesh extract_isosurface(const VoxelGrid& field, double iso);

/// Surface of a binary mask in world millimeters. Throws Geometry on an
/// empty mask or an empty resulting surface.
TriangleMesh extract_surface(const BinaryMask& m, const SurfaceOptions& options = {});

}  // namespace negvol
