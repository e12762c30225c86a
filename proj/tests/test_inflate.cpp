#include <doctest.h>

#include <fstream>
#include <numbers>

#include "negvol/distance.hpp"
#include "negvol/inflate.hpp"
#include "negvol/marching_cubes.hpp"
#include "negvol/morphology.hpp"
#include "negvol/voxelize.hpp"
#include "support.hpp"

using namespace negvol;
using testsupport::cube_geometry;

namespace {

// Confining bone = everything farther than R from c.
BinaryMask cavity(const GridGeometry& g, const Vec3& c, double R) {
  return complement(testsupport::ball_mask(g, c, R));
}

double mean_radius(const TriangleMesh& m, const Vec3& c) {
  double s = 0.0;
  for (const Vec3& v : m.vertices) s += (v - c).norm();
  return s / static_cast<double>(m.vertices.size());
}

void check_invariants(const InflationResult& r, const VoxelGrid& sdf, const InflationConfig& cfg) {
  const auto& rec = r.trace.records;
  REQUIRE(!rec.empty());
  double prev_volume = r.trace.initial_volume_mm3;
  std::size_t prev_free = r.trace.vertex_count;
  for (const auto& x : rec) {
    CHECK(x.free_count <= prev_free);
    CHECK(x.volume_mm3 >= prev_volume * (1.0 - 0.005));
    CHECK(x.min_sdf_mm >= cfg.clearance_mm);
    prev_free = x.free_count;
    prev_volume = x.volume_mm3;
  }
  std::size_t violations = 0;
  for (const Vec3& v : r.mesh.vertices) violations += sample_trilinear(sdf, v) < cfg.clearance_mm - 1e-9;
  CHECK(violations == 0);
  CHECK(is_consistently_oriented(r.mesh));
}

}  // namespace

TEST_SUITE("inflate") {

TEST_CASE("a sphere inflates to the confining sphere minus the clearance") {
  const auto g = cube_geometry(72, 0.4);
  const Vec3 c = g.world(35.5, 35.5, 35.5);
  const VoxelGrid sdf = distance_field(cavity(g, c, 12.0));
  InflationConfig cfg;
  const InflationResult r = inflate(make_icosphere(5.0, 4, c), sdf, cfg);
  const double rm = mean_radius(r.mesh, c);
  CHECK(rm >= 11.7);
  CHECK(rm <= 11.9);
  check_invariants(r, sdf, cfg);
  CHECK(r.trace.records.back().free_count < 0.02 * r.trace.vertex_count);
}

TEST_CASE("a seed already near the wall barely moves") {
  const auto g = cube_geometry(120, 0.1);
  const Vec3 c = g.world(59.5, 59.5, 59.5);
  InflationConfig cfg;
  const double eps = 0.3;
  const VoxelGrid sdf = distance_field(cavity(g, c, 5.0 + cfg.clearance_mm + eps));
  const InflationResult r = inflate(make_icosphere(5.0, 3, c), sdf, cfg);
  CHECK(r.trace.records.back().mean_displacement_mm <= eps + cfg.step_mm);
  check_invariants(r, sdf, cfg);
}

TEST_CASE("a seed penetrating the clearance band is rejected") {
  const auto g = cube_geometry(40, 0.4);
  const Vec3 c = g.world(19.5, 19.5, 19.5);
  const VoxelGrid sdf = distance_field(cavity(g, c, 5.1));
  CHECK_THROWS_AS(inflate(make_icosphere(5.0, 3, c), sdf, InflationConfig{}), Error);
}

TEST_CASE("with the confining bone far away inflation runs to the iteration cap") {
  const auto g = cube_geometry(60, 0.5);
  BinaryMask tb(g);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < 3; ++i) tb(i, j, k) = 1;
  const VoxelGrid sdf = distance_field(tb);
  InflationConfig cfg;
  cfg.max_iterations = 10;
  const Vec3 c = g.world(40, 40, 40);
  const InflationResult r = inflate(make_icosphere(3.0, 3, c), sdf, cfg);
  REQUIRE(r.trace.records.size() == 10);
  CHECK(r.trace.records.back().free_count == r.trace.vertex_count);
  CHECK(r.trace.records.back().mean_displacement_mm <= 1.0);
  CHECK(r.trace.records.back().volume_mm3 > r.trace.initial_volume_mm3);
}

TEST_CASE("a field with no sign change and bad configs are rejected") {
  const auto g = cube_geometry(20, 0.5);
  const VoxelGrid flat(g, 5.0f);
  const TriangleMesh s = make_icosphere(2.0, 2, g.world(10, 10, 10));
  CHECK_THROWS_AS(inflate(s, flat, InflationConfig{}), Error);
  InflationConfig cfg;
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.step_mm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.step_mm = 2.0;
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(cfg.validate(g), Error);
  const VoxelGrid sdf = distance_field(cavity(g, g.world(10, 10, 10), 4.0));
  CHECK_THROWS_AS(inflate(flipped(s), sdf, InflationConfig{}), Error);
}

TEST_CASE("inflation is bit-identical across reruns and writes its trace") {
  const auto g = cube_geometry(48, 0.4);
  const Vec3 c = g.world(23.5, 23.5, 23.5);
  const VoxelGrid sdf = distance_field(cavity(g, c, 8.0));
  const TriangleMesh seed = make_icosphere(3.0, 3, c);
  const InflationResult a = inflate(seed, sdf, InflationConfig{});
  const InflationResult b = inflate(seed, sdf, InflationConfig{});
  CHECK(a.mesh.vertices == b.mesh.vertices);
  CHECK(a.trace.records.size() == b.trace.records.size());
  const auto dir = testsupport::scratch_dir("trace");
  a.trace.write_csv(dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,free_count,mean_disp_mm,min_sdf_mm,volume_mm3");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  CHECK(rows == a.trace.records.size());
}

TEST_CASE("negative volume equals the set-algebra oracle") {
  const auto g = cube_geometry(32, 0.5);
  const Vec3 c = g.world(15.5, 15.5, 15.5);
  const BinaryMask mc = testsupport::ball_mask(g, c, 3.0);
  const BinaryMask tb = cavity(g, c, 6.5);
  const VoxelGrid sdf = distance_field(tb);
  const InflationResult r = inflate(extract_surface(mc), sdf, InflationConfig{});
  const NegativeVolume nv = negative_volume(r.mesh, mc, tb, std::nullopt);
  const BinaryMask oracle = largest_component(mask_andnot(mask_andnot(voxelize(r.mesh, g), mc), tb));
  CHECK(nv.mask == oracle);
  CHECK(count(mask_and(nv.mask, mc)) == 0);
  CHECK(count(mask_and(nv.mask, tb)) == 0);
  CHECK(is_consistently_oriented(nv.mesh));

  ClipPlane p;
  p.point = c;
  p.normal = -Vec3::UnitZ();
  const NegativeVolume half = negative_volume(r.mesh, mc, tb, p);
  CHECK(count(half.mask) < count(nv.mask));
  CHECK(is_subset(half.mask, nv.mask));
  std::size_t below = 0;
  for (std::size_t k = 0; k < 32; ++k)
    for (std::size_t j = 0; j < 32; ++j)
      for (std::size_t i = 0; i < 32; ++i) below += half.mask(i, j, k) && p.signed_distance(g.world(i, j, k)) > 0.0;
  CHECK(below == 0);
}

TEST_CASE("negative volume of a surface against its own mask is degenerate") {
  const auto g = cube_geometry(24, 0.5);
  const BinaryMask mc = testsupport::ball_mask(g, g.world(11.5, 11.5, 11.5), 3.0);
  const BinaryMask tb = cavity(g, g.world(11.5, 11.5, 11.5), 5.0);
  CHECK_THROWS_AS(negative_volume(extract_surface(mc, {0.5, 0.0}), mc, tb, std::nullopt), Error);
}

TEST_CASE("auto neck plane cuts through the narrowest slice under the head") {
  const auto g = cube_geometry(40, 0.5);
  const Vec3 head = g.world(20, 20, 26);
  BinaryMask m = testsupport::ball_mask(g, head, 5.0);
  for (std::size_t k = 4; k < 30; ++k)
    for (std::size_t j = 0; j < 40; ++j)
      for (std::size_t i = 0; i < 40; ++i) {
        const Vec3 p = g.world(i, j, k);
        const double rr = std::hypot(p.x() - head.x(), p.y() - head.y());
        if (rr <= 2.0 || (k < 8 && rr <= 6.0)) m(i, j, k) = 1;
      }
  const ClipPlane p = auto_neck_plane(m);
  CHECK(p.normal.isApprox(-Vec3::UnitZ()));
  CHECK(p.point.z() < head.z() - 3.0);
  CHECK(p.point.z() > g.world(0, 0, 8).z());
  CHECK(std::abs(p.point.x() - head.x()) < 0.5);
  BinaryMask thin(g);
  thin(5, 5, 5) = 1;
  CHECK_THROWS_AS(auto_neck_plane(thin), Error);
}

}  // TEST_SUITE
