#pragma once

#include "negvol/grid.hpp"
#include "negvol/mesh.hpp"

namespace negvol {

struct VoxelizeOptions {
  /// Stamp only the voxels the surface passes through; allows open meshes.
  bool surface_only = false;
};

/// Occupancy of a mesh on the template geometry.
///
/// Solid mode: a voxel is occupied when the winding number of the closed
/// mesh around its center is positive. Winding numbers come from signed ray
/// crossings along x, one scanline per (y, z) row, with a consistent
/// tie-break for rays through shared edges and vertices, so overlapping
/// folds still count as inside.
///
/// Surface mode: faces are split by longest-edge bisection until every edge
/// is shorter than the smallest spacing, and each fragment stamps the voxels
/// its bounding box touches.
///
/// Throws Geometry for open meshes unless `surface_only` is set.
BinaryMask voxelize(const TriangleMesh& mesh, const GridGeometry& templ,
                    const VoxelizeOptions& options = {});

}  // namespace negvol
