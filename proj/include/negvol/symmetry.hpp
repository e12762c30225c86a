#pragma once

#include <cstdint>
#include <json.hpp>

#include "negvol/grid.hpp"
#include "negvol/mesh.hpp"

namespace negvol {

/// Symmetric Hausdorff distance (mm) between two point sets. Exact; equal
/// to the brute-force value. Throws Geometry for an empty cloud.
double hausdorff(const PointCloud& a, const PointCloud& b);

struct DistanceStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and population standard deviation of the nearest-neighbor
/// distances from every point of a to b and from every point of b to a.
DistanceStats mean_surface_distance(const PointCloud& a, const PointCloud& b);

/// 2|a & b| / (|a| + |b|), 1 when both are empty.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Mean binary cross-entropy (nats) with probabilities clamped to
/// [1e-7, 1 - 1e-7]. Throws Io for values outside [0, 1].
double cross_entropy(const VoxelGrid& p, const BinaryMask& t);

struct SymmetryOptions {
  std::size_t samples = 20000;
  /// Both sides use the same stream, so identical surfaces give identical clouds.
  std::uint64_t seed = 0;
  /// Recompute the Hausdorff distance with twice the samples and report the
  /// relative change.
  bool convergence_check = true;
};

struct SymmetryReport {
  double S_L_mm2 = 0.0;
  double S_R_mm2 = 0.0;
  double Vol_L_mm3 = 0.0;
  double Vol_R_mm3 = 0.0;
  double S_LR = 1.0;
  double H_LR_mm = 0.0;
  double msd_mean_mm = 0.0;
  double msd_std_mm = 0.0;
  double mirror_plane_x_mm = 0.0;
  /// Applied to the mirrored right side to match surface centroids.
  Vec3 translation_mm = Vec3::Zero();
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// sqrt(area / samples), averaged over both sides.
  double sampling_gap_mm = 0.0;
  /// |H(2n) - H(n)| / H(n); negative when the check was skipped.
  double convergence_rel_change = -1.0;

  nlohmann::json to_json() const;
};

/// Mirrors the right surface across x = sagittal_x, aligns its surface
/// centroid with the left one, and compares the two on sampled point
/// clouds. Throws Geometry for open meshes or non-positive volumes.
SymmetryReport compare_sides(const TriangleMesh& left, const TriangleMesh& right, double sagittal_x_mm,
                             const SymmetryOptions& options = {});

}  // namespace negvol
