#include <doctest.h>

#include <cmath>
#include <random>

#include "negvol/voi.hpp"
#include "negvol/morphology.hpp"
#include "support.hpp"

using namespace negvol;

namespace {

GridGeometry slab_geometry() {
  GridGeometry g;
  g.dims = {60, 24, 24};
  g.spacing = Vec3(0.5, 0.5, 0.5);
  g.origin = Vec3(-15, -6, -6);
  return g;
}

// Two Gaussian blobs left and right of x = 0 plus background noise.
VoxelGrid two_blobs(double noise) {
  const auto g = slab_geometry();
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0.0f, static_cast<float>(noise));
  VoxelGrid v(g);
  for (std::size_t k = 0; k < g.nz(); ++k)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const Vec3 p = g.world(i, j, k);
        const double a = std::exp(-(p - Vec3(-8, 0, 0)).squaredNorm() / 8.0);
        const double b = std::exp(-(p - Vec3(8, 1, 0)).squaredNorm() / 8.0);
        v(i, j, k) = static_cast<float>(100.0 + 900.0 * (a + b)) + n(rng);
      }
  return v;
}

}  // namespace

TEST_SUITE("voi") {

TEST_CASE("coarse mask of two blobs has two components split around the middle") {
  const VoxelGrid v = two_blobs(5.0);
  CoarseMaskOptions opt;
  opt.bone_threshold = 0.5;
  const BinaryMask m = coarse_mask_from_intensity(v, opt);
  CHECK(label_components(m).component_count() == 2);
  const SplitResult s = split_left_right(m, 3);
  CHECK(s.gap_begin <= 30);
  CHECK(s.gap_end >= 29);
  CHECK(s.left.max[0] < s.right.min[0]);
  CHECK(s.left.max[0] <= (s.gap_begin + s.gap_end) / 2);
  CHECK(s.left.geometry == m.geometry());
  CHECK_NOTHROW(s.left.validate());
  const auto j = s.right.to_json();
  CHECK(j.contains("min_mm"));
}

TEST_CASE("the minimum method separates two plateau blobs without a fixed threshold") {
  const auto g = slab_geometry();
  const BinaryMask truth = mask_or(testsupport::ball_mask(g, Vec3(-8, 0, 0), 4.0),
                                   testsupport::ball_mask(g, Vec3(8, 0, 0), 4.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<float> n(0.0f, 0.05f);
  VoxelGrid v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (truth[i] ? 0.8f : 0.2f) + n(rng);
  const BinaryMask m = coarse_mask_from_intensity(v);
  CHECK(label_components(m).component_count() == 2);
  CHECK(count(mask_andnot(m, truth)) == 0);
}

TEST_CASE("a single blob has no sagittal gap") {
  const auto g = slab_geometry();
  const BinaryMask one = testsupport::ball_mask(g, Vec3(0, 0, 0), 4.0);
  CHECK_THROWS_AS(split_left_right(one), Error);
  const BoundingBox b = bounding_box(one, 2);
  CHECK(b.min[0] == 30 - 8 - 2);
  CHECK(b.max[0] == 30 + 8 + 2);
  CHECK_THROWS_AS(bounding_box(BinaryMask(g)), Error);
}

TEST_CASE("probability maps must be probabilities and empty results are degenerate") {
  const auto g = slab_geometry();
  VoxelGrid p(g, 0.0f);
  p[0] = 1.5f;
  CHECK_THROWS_AS(coarse_mask_from_probability(p), Error);
  VoxelGrid flat(g, 0.3f);
  CHECK_THROWS_AS(coarse_mask_from_intensity(flat), Error);
}

TEST_CASE("crop keeps world positions and scales boxes from a coarse grid") {
  GridGeometry g;
  g.dims = {20, 16, 12};
  g.spacing = Vec3(0.5, 0.5, 1.0);
  g.origin = Vec3(1, 2, 3);
  VoxelGrid v(g);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = static_cast<float>(n);
  BoundingBox box;
  box.geometry = g;
  box.min = {2, 3, 4};
  box.max = {5, 9, 6};
  const VoxelGrid c = crop(v, box);
  CHECK(c.dims() == Dims{4, 7, 3});
  CHECK(c.geometry().origin.isApprox(g.world(2, 3, 4)));
  CHECK(c(1, 2, 0) == v(3, 5, 4));

  // Box found on a half-resolution grid, mapped to the full grid.
  GridGeometry coarse = g;
  coarse.dims = {10, 8, 6};
  BoundingBox cb;
  cb.geometry = coarse;
  cb.min = {1, 1, 1};
  cb.max = {3, 2, 4};
  const Vec3 s = box_scale(coarse, g);
  CHECK(s.isApprox(Vec3(2, 2, 2)));
  const BoundingBox fb = scaled_box(cb, g, s);
  CHECK(fb.min == std::array<long, 3>{2, 2, 2});
  CHECK(fb.max == std::array<long, 3>{7, 5, 9});

  std::vector<std::string> warnings;
  cb.max = {9, 7, 5};
  cb.min = {0, 0, 0};
  const BoundingBox clamped = scaled_box(cb, g, Vec3(2.5, 2, 2), &warnings);
  CHECK(clamped.max[0] == 19);
  CHECK_FALSE(warnings.empty());
  box.max = {5, 2, 6};
  CHECK_THROWS_AS(crop(v, box), Error);
}

TEST_CASE("embed writes a crop back in place") {
  const auto g = slab_geometry();
  const BinaryMask m = testsupport::random_mask(g, 0.5, 9);
  BoundingBox box;
  box.geometry = g;
  box.min = {10, 4, 2};
  box.max = {30, 20, 21};
  const BinaryMask sub = crop(m, box);
  BinaryMask back(g);
  embed(sub, back, box.min);
  CHECK(crop(back, box) == sub);
  CHECK(count(back) == count(sub));
  CHECK_THROWS_AS(embed(sub, back, {50, 0, 0}), Error);
}

}  // TEST_SUITE
