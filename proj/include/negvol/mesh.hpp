#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "negvol/grid.hpp"

namespace negvol {

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle surface in millimeters. Counter-clockwise faces (seen
/// from outside) give outward normals.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
};

struct PointCloud {
  std::vector<Vec3> points;
};

/// Faces below this area (mm^2) are rejected by validate().
inline constexpr double kDegenerateFaceArea = 1e-12;

/// Throws Geometry on out-of-range indices or degenerate faces.
void validate(const TriangleMesh& mesh);

/// Every undirected edge is shared by exactly two faces.
bool is_closed(const TriangleMesh& mesh);

/// Closed, and each shared edge is traversed once in each direction.
bool is_consistently_oriented(const TriangleMesh& mesh);

Vec3 face_normal_unnormalized(const TriangleMesh& mesh, std::size_t f);

/// Sum of triangle areas (pairwise summation).
double surface_area(const TriangleMesh& mesh);

/// Divergence-theorem volume, positive for outward orientation. Throws
/// Geometry when the mesh is not closed.
double enclosed_volume(const TriangleMesh& mesh);

/// Area-weighted centroid of the surface.
Vec3 surface_centroid(const TriangleMesh& mesh);

/// Unit normals from area-weighted incident face normals. Throws Geometry
/// for vertices with no incident faces (or a zero normal sum).
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// Sorted unique neighbor lists, one per vertex.
std::vector<std::vector<std::uint32_t>> vertex_neighbors(const TriangleMesh& mesh);

/// Uniform Laplacian: each non-frozen vertex moves by
/// lambda * (neighbor centroid - vertex) per iteration. `frozen` is either
/// empty or one flag per vertex.
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, double lambda, int iterations,
                              std::span<const std::uint8_t> frozen = {});

/// Area-uniform random points, deterministic for a given seed.
PointCloud sample_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

TriangleMesh flipped(const TriangleMesh& mesh);
TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset);
/// Scales about `center`.
TriangleMesh scaled(const TriangleMesh& mesh, double factor, const Vec3& center);
/// Reflects across the plane x = plane_x and flips faces so orientation stays outward.
TriangleMesh mirrored_x(const TriangleMesh& mesh, double plane_x);

/// Appends b to a (indices offset).
TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b);

/// Subdivided icosahedron projected onto a sphere.
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

/// Axis-aligned box, two triangles per side.
TriangleMesh make_box(const Vec3& lo, const Vec3& hi);

}  // namespace negvol
