#include <doctest.h>

#include <cmath>
#include <random>

#include "negvol/grid.hpp"
#include "negvol/grid_io.hpp"
#include "negvol/parallel.hpp"
#include "support.hpp"

using namespace negvol;
using testsupport::cube_geometry;

TEST_SUITE("grid") {

TEST_CASE("geometry indexing is x fastest and world follows origin and spacing") {
  GridGeometry g;
  g.dims = {4, 3, 2};
  g.spacing = Vec3(0.5, 1.0, 2.0);
  g.origin = Vec3(10, 20, 30);
  CHECK(g.index(1, 0, 0) == 1);
  CHECK(g.index(0, 1, 0) == 4);
  CHECK(g.index(0, 0, 1) == 12);
  CHECK(g.world(2, 1, 1).isApprox(Vec3(11, 21, 32)));
  CHECK(g.to_index(Vec3(11, 21, 32)).isApprox(Vec3(2, 1, 1)));
  CHECK(g.voxel_volume() == doctest::Approx(1.0));
}

TEST_CASE("invalid geometry is rejected") {
  GridGeometry g;
  g.dims = {0, 3, 3};
  CHECK_THROWS_AS(g.validate(), Error);
  g.dims = {3, 3, 3};
  g.spacing = Vec3(1, -1, 1);
  CHECK_THROWS_AS(g.validate(), Error);
  g.spacing = Vec3(1, NAN, 1);
  CHECK_THROWS_AS(g.validate(), Error);
  CHECK_THROWS_AS(VoxelGrid(cube_geometry(2), std::vector<float>(7)), Error);
}

TEST_CASE("mask set algebra") {
  const auto g = cube_geometry(8);
  const BinaryMask a = testsupport::random_mask(g, 0.4, 1);
  const BinaryMask b = testsupport::random_mask(g, 0.6, 2);
  CHECK(count(mask_or(a, b)) + count(mask_and(a, b)) == count(a) + count(b));
  CHECK(count(mask_andnot(a, b)) == count(a) - count(mask_and(a, b)));
  CHECK(complement(complement(a)) == a);
  CHECK(is_subset(mask_and(a, b), a));
  CHECK_FALSE(is_subset(a, mask_and(a, b)));
  GridGeometry other = g;
  other.spacing = Vec3(2, 2, 2);
  CHECK_THROWS_AS(mask_and(a, BinaryMask(other)), Error);
}

TEST_CASE("normalize_minmax maps onto [0,1] and rejects non-finite values") {
  VoxelGrid g(cube_geometry(2), std::vector<float>{-2, 0, 2, 6, 6, 6, 6, -2});
  const VoxelGrid n = normalize_minmax(g);
  CHECK(n[0] == 0.0f);
  CHECK(n[1] == doctest::Approx(0.25));
  CHECK(n[3] == 1.0f);
  VoxelGrid c(cube_geometry(2), 3.0f);
  const VoxelGrid nc = normalize_minmax(c);
  for (float v : nc.values()) CHECK(v == 0.0f);
  c[3] = INFINITY;
  CHECK_THROWS_AS(normalize_minmax(c), Error);
}

TEST_CASE("minimum-method threshold matches a frozen reference value") {
  // Reference computed once with scikit-image 0.25 threshold_minimum on the
  // same values (nbins=256).
  std::vector<float> values{0.0f, 1.0f};
  for (int b = 0; b < 256; ++b) {
    const int c = static_cast<int>(std::lround(1000 * std::exp(-std::pow((b - 70) / 20.0, 2)) +
                                               600 * std::exp(-std::pow((b - 180) / 15.0, 2)))) +
                  (b * 7 % 13);
    values.insert(values.end(), static_cast<std::size_t>(c), static_cast<float>((b + 0.5) / 256.0));
  }
  CHECK(minimum_method_threshold(values, 256) == doctest::Approx(0.517578125).epsilon(1e-12));
}

TEST_CASE("minimum-method threshold separates a symmetric Gaussian mixture near the middle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> lo(0.25f, 0.06f), hi(0.75f, 0.06f);
  std::vector<float> v;
  for (int i = 0; i < 20000; ++i) v.push_back(std::clamp(i % 2 ? lo(rng) : hi(rng), 0.0f, 1.0f));
  const double t = minimum_method_threshold(v, 256);
  CHECK(t >= 0.45);
  CHECK(t <= 0.55);
}

TEST_CASE("minimum-method threshold handles two pure levels and rejects one") {
  std::vector<float> two(100, 0.0f);
  two.insert(two.end(), 50, 1.0f);
  const double t = minimum_method_threshold(two, 256);
  CHECK(t > 0.0);
  CHECK(t < 1.0);
  std::vector<float> one(100, 0.5f);
  CHECK_THROWS_AS(minimum_method_threshold(one, 256), Error);
}

TEST_CASE("trilinear resampling reproduces a linear ramp and keeps the physical extent") {
  GridGeometry g;
  g.dims = {20, 12, 8};
  g.spacing = Vec3(0.5, 1.0, 2.0);
  VoxelGrid ramp(g);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t j = 0; j < 12; ++j)
      for (std::size_t i = 0; i < 20; ++i) {
        const Vec3 p = g.world(i, j, k);
        ramp(i, j, k) = static_cast<float>(1.0 + 0.3 * p.x() - 0.2 * p.y() + 0.1 * p.z());
      }
  const VoxelGrid r = resample(ramp, {10, 12, 16}, ResampleMethod::Trilinear);
  const auto& rg = r.geometry();
  CHECK(rg.spacing.isApprox(Vec3(1.0, 1.0, 1.0)));
  for (int a = 0; a < 3; ++a) {
    CHECK(rg.spacing[a] * rg.dims[a] == doctest::Approx(g.spacing[a] * g.dims[a]));
  }
  for (std::size_t k = 1; k + 1 < 16; ++k)
    for (std::size_t j = 1; j + 1 < 12; ++j)
      for (std::size_t i = 1; i + 1 < 10; ++i) {
        const Vec3 p = rg.world(i, j, k);
        CHECK(r(i, j, k) == doctest::Approx(1.0 + 0.3 * p.x() - 0.2 * p.y() + 0.1 * p.z()).epsilon(1e-5));
      }
}

TEST_CASE("downsampling 686 voxels to 160 scales spacing by the dims ratio") {
  GridGeometry g;
  g.dims = {686, 2, 2};
  g.spacing = Vec3(0.3, 1, 1);
  const VoxelGrid r = resample(VoxelGrid(g, 1.0f), {160, 2, 2}, ResampleMethod::Nearest);
  CHECK(r.geometry().spacing.x() == doctest::Approx(0.3 * 686 / 160));
  for (float v : r.values()) CHECK(v == 1.0f);
}

TEST_CASE("raw grid files round trip") {
  const auto dir = testsupport::scratch_dir("grid_io");
  GridGeometry g;
  g.dims = {5, 4, 3};
  g.spacing = Vec3(0.4, 0.5, 0.6);
  g.origin = Vec3(-1, 2, 3.5);
  VoxelGrid v(g);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = static_cast<float>(n) * 0.25f - 3.0f;
  write_grid(dir / "v", v);
  CHECK(read_grid(dir / "v.json") == v);
  CHECK(read_grid(dir / "v.raw") == v);
  const BinaryMask m = testsupport::random_mask(g, 0.5, 3);
  write_mask(dir / "m.json", m);
  CHECK(read_mask(dir / "m") == m);
  CHECK(read_geometry(dir / "m") == g);
  CHECK_THROWS_AS(read_grid(dir / "missing"), Error);
  std::filesystem::resize_file(dir / "v.raw", 10);
  CHECK_THROWS_AS(read_grid(dir / "v"), Error);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(0, hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}

}  // TEST_SUITE
