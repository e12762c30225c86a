#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "negvol/grid.hpp"
#include "negvol/mesh.hpp"

namespace negvol {

struct InflationConfig {
  double step_mm = 0.1;
  /// Gap kept to the confining surface.
  double clearance_mm = 0.2;
  double lambda = 0.3;
  int smooth_every = 1;
  int max_iterations = 500;
  /// Inflation stops once fewer than this fraction of vertices are free.
  double stop_fraction = 0.02;

  /// Throws Config for out-of-range values. With a field geometry, also
  /// requires step_mm < clearance_mm + voxel diagonal.
  void validate() const;
  void validate(const GridGeometry& sdf_geometry) const;
};

/// Half-space cut. The side the normal points into is removed.
struct ClipPlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = -Vec3::UnitZ();

  double signed_distance(const Vec3& p) const { return (p - point).dot(normal); }
  /// Throws Config unless |normal| == 1 within 1e-9.
  void validate() const;
};

struct InflationRecord {
  int iteration = 0;
  std::size_t free_count = 0;
  /// Mean distance of all vertices from their starting positions.
  double mean_displacement_mm = 0.0;
  double min_sdf_mm = 0.0;
  double volume_mm3 = 0.0;
};

struct InflationTrace {
  std::size_t vertex_count = 0;
  double initial_volume_mm3 = 0.0;
  std::vector<InflationRecord> records;

  void write_csv(const std::filesystem::path& path) const;
};

struct InflationResult {
  TriangleMesh mesh;
  InflationTrace trace;
};

/// Grows a closed, outward-oriented mesh along its vertex normals inside
/// the free space of `tb_sdf` (negative inside the confining bone).
///
/// Each iteration moves every free vertex one step along its normal, unless
/// the sampled field at the new position would drop below the clearance, in
/// which case (or when the step would leave the field grid) the vertex is
/// frozen where it is. Smoothing passes pin frozen
/// vertices and never move a vertex into the clearance band, so every
/// vertex ends with a field value of at least clearance_mm.
///
/// Errors: Config for a bad config; Geometry for an inward-oriented mesh,
/// when the field has no sign
/// change or the mesh already violates the clearance.
InflationResult inflate(const TriangleMesh& mc, const VoxelGrid& tb_sdf, const InflationConfig& cfg);

/// Cuts away the part of a closed mesh on the positive side of the plane.
/// With `cap`, each cut loop is closed with a fan around its centroid.
/// Throws Geometry when nothing remains.
TriangleMesh clip(const TriangleMesh& mesh, const ClipPlane& plane, bool cap = true);

struct NegativeVolume {
  BinaryMask mask;
  TriangleMesh mesh;
};

/// Voxel-space difference: occupancy of the (clipped) inflated surface
/// minus both bone masks, reduced to its largest component. Throws
/// Degenerate when the difference is empty.
NegativeVolume negative_volume(const TriangleMesh& inflated, const BinaryMask& mc_mask,
                               const BinaryMask& tb_mask, const std::optional<ClipPlane>& plane);

/// Plane through the neck of the condyle mask, removing everything further
/// down (-z). Walking the axial area profile from the top, the neck is the
/// first narrowing to below 80% of the head's widest slice; the cut goes
/// through the highest slice within 5% of the narrowest one before the
/// profile widens again. Throws Degenerate for masks spanning fewer than
/// three slices or without such a narrowing.
ClipPlane auto_neck_plane(const BinaryMask& mc_mask);

}  // namespace negvol
