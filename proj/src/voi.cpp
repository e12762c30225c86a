#include "negvol/voi.hpp"

#include <algorithm>
#include <cmath>

#include "negvol/morphology.hpp"

namespace negvol {

std::array<std::size_t, 3> BoundingBox::extent() const {
  std::array<std::size_t, 3> e{};
  for (int a = 0; a < 3; ++a) e[a] = static_cast<std::size_t>(max[a] - min[a] + 1);
  return e;
}

void BoundingBox::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (min[a] > max[a] || min[a] < 0 || max[a] >= static_cast<long>(geometry.dims[a])) {
      fail(ErrorKind::Config, "bounding box outside its grid or inverted");
    }
  }
}

nlohmann::json BoundingBox::to_json() const {
  const Vec3 lo = geometry.world(static_cast<double>(min[0]), static_cast<double>(min[1]),
                                 static_cast<double>(min[2]));
  const Vec3 hi = geometry.world(static_cast<double>(max[0]), static_cast<double>(max[1]),
                                 static_cast<double>(max[2]));
  return {{"min_voxel", min},
          {"max_voxel", max},
          {"min_mm", {lo.x(), lo.y(), lo.z()}},
          {"max_mm", {hi.x(), hi.y(), hi.z()}}};
}

namespace {

BinaryMask postprocess(const BinaryMask& raw, const CoarseMaskOptions& options) {
  BinaryMask m = remove_small_components(open(raw, StructuringElement::ball(1)), options.min_component_voxels);
  if (count(m) == 0) fail(ErrorKind::Degenerate, "coarse_mask: nothing survives thresholding and opening");
  return m;
}

}  // namespace

BinaryMask coarse_mask_from_probability(const VoxelGrid& probability, const CoarseMaskOptions& options) {
  for (float v : probability.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorKind::Io, "coarse_mask: probability outside [0, 1]");
  }
  return postprocess(threshold_minimum(probability, options.histogram_bins), options);
}

BinaryMask coarse_mask_from_intensity(const VoxelGrid& intensity, const CoarseMaskOptions& options) {
  const VoxelGrid n = normalize_minmax(intensity);
  if (options.bone_threshold) {
    const double t = *options.bone_threshold;
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::Config, "coarse_mask: bone_threshold must be in [0, 1]");
    return postprocess(threshold_above(n, t), options);
  }
  return postprocess(threshold_minimum(n, options.histogram_bins), options);
}

namespace {

// Occupied bounds within x slices [x0, x1], grown by margin and clamped.
BoundingBox tight_box(const BinaryMask& m, long margin, long x0, long x1) {
  const auto& g = m.geometry();
  BoundingBox b;
  b.geometry = g;
  b.min = {static_cast<long>(g.nx()), static_cast<long>(g.ny()), static_cast<long>(g.nz())};
  b.max = {-1, -1, -1};
  for (std::size_t k = 0; k < g.nz(); ++k) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (long i = x0; i <= x1; ++i) {
        if (!m(static_cast<std::size_t>(i), j, k)) continue;
        const long p[3] = {i, static_cast<long>(j), static_cast<long>(k)};
        for (int a = 0; a < 3; ++a) {
          b.min[a] = std::min(b.min[a], p[a]);
          b.max[a] = std::max(b.max[a], p[a]);
        }
      }
    }
  }
  if (b.max[0] < 0) fail(ErrorKind::Degenerate, "bounding_box: empty mask");
  for (int a = 0; a < 3; ++a) {
    b.min[a] = std::max(0L, b.min[a] - margin);
    b.max[a] = std::min(static_cast<long>(g.dims[a]) - 1, b.max[a] + margin);
  }
  return b;
}

}  // namespace

BoundingBox bounding_box(const BinaryMask& m, long margin) {
  if (margin < 0) fail(ErrorKind::Config, "bounding_box: margin must be >= 0");
  return tight_box(m, margin, 0, static_cast<long>(m.nx()) - 1);
}

SplitResult split_left_right(const BinaryMask& m, long margin) {
  if (margin < 0) fail(ErrorKind::Config, "split_left_right: margin must be >= 0");
  const auto& g = m.geometry();
  const long nx = static_cast<long>(g.nx());
  std::vector<std::size_t> profile(g.nx(), 0);
  for (std::size_t k = 0; k < g.nz(); ++k) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) profile[i] += m(i, j, k) != 0;
    }
  }
  long first = -1, last = -1;
  for (long i = 0; i < nx; ++i) {
    if (profile[static_cast<std::size_t>(i)] == 0) continue;
    if (first < 0) first = i;
    last = i;
  }
  // Widest run of empty slices strictly between occupied ones; the first wins ties.
  long best_begin = -1, best_len = 0;
  for (long i = first; first >= 0 && i <= last;) {
    if (profile[static_cast<std::size_t>(i)] != 0) {
      ++i;
      continue;
    }
    long e = i;
    while (profile[static_cast<std::size_t>(e)] == 0) ++e;
    if (e - i > best_len) {
      best_len = e - i;
      best_begin = i;
    }
    i = e;
  }
  if (best_len == 0) {
    fail(ErrorKind::Degenerate, "split_left_right: split ambiguity, no empty sagittal gap between joints");
  }

  SplitResult r;
  r.gap_begin = best_begin;
  r.gap_end = best_begin + best_len - 1;
  const long mid = (r.gap_begin + r.gap_end) / 2;

  auto tight = [&](long x0, long x1) { return tight_box(m, margin, x0, x1); };
  r.left = tight(first, r.gap_begin - 1);
  r.right = tight(r.gap_end + 1, last);
  r.left.max[0] = std::min(r.left.max[0], mid);
  r.right.min[0] = std::max(r.right.min[0], mid + 1);
  return r;
}

Vec3 box_scale(const GridGeometry& box_grid, const GridGeometry& target) {
  Vec3 s;
  for (int a = 0; a < 3; ++a) s[a] = static_cast<double>(target.dims[a]) / static_cast<double>(box_grid.dims[a]);
  return s;
}

BoundingBox scaled_box(const BoundingBox& box, const GridGeometry& g, const Vec3& scale,
                       std::vector<std::string>* warnings) {
  if (!(scale.array() > 0.0).all()) fail(ErrorKind::Config, "crop: scale must be positive");
  BoundingBox out;
  out.geometry = g;
  static const char* axis_name[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    if (box.min[a] > box.max[a]) fail(ErrorKind::Config, "crop: inverted bounding box");
    long lo = static_cast<long>(std::floor(static_cast<double>(box.min[a]) * scale[a]));
    long hi = static_cast<long>(std::ceil(static_cast<double>(box.max[a] + 1) * scale[a])) - 1;
    const long n = static_cast<long>(g.dims[a]);
    if (lo < 0 || hi >= n) {
      if (warnings) {
        warnings->push_back(std::string("crop: box clamped along ") + axis_name[a] + " from [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "] to the grid");
      }
      lo = std::clamp(lo, 0L, n - 1);
      hi = std::clamp(hi, 0L, n - 1);
    }
    if (lo > hi) fail(ErrorKind::Config, "crop: box lies outside the grid");
    out.min[a] = lo;
    out.max[a] = hi;
  }
  return out;
}

template <class T>
Grid<T> crop(const Grid<T>& g, const BoundingBox& box, const Vec3& scale, std::vector<std::string>* warnings) {
  const BoundingBox b = scaled_box(box, g.geometry(), scale, warnings);
  GridGeometry sub = g.geometry();
  const auto e = b.extent();
  sub.dims = {e[0], e[1], e[2]};
  sub.origin = g.geometry().world(static_cast<double>(b.min[0]), static_cast<double>(b.min[1]),
                                  static_cast<double>(b.min[2]));
  Grid<T> out(sub);
  for (std::size_t k = 0; k < e[2]; ++k) {
    for (std::size_t j = 0; j < e[1]; ++j) {
      for (std::size_t i = 0; i < e[0]; ++i) {
        out(i, j, k) = g(i + static_cast<std::size_t>(b.min[0]), j + static_cast<std::size_t>(b.min[1]),
                         k + static_cast<std::size_t>(b.min[2]));
      }
    }
  }
  return out;
}

template <class T>
void embed(const Grid<T>& sub, Grid<T>& into, const std::array<long, 3>& at) {
  for (int a = 0; a < 3; ++a) {
    if (at[a] < 0 || at[a] + static_cast<long>(sub.dims()[a]) > static_cast<long>(into.dims()[a])) {
      fail(ErrorKind::Geometry, "embed: sub-grid does not fit at the given position");
    }
  }
  for (std::size_t k = 0; k < sub.nz(); ++k) {
    for (std::size_t j = 0; j < sub.ny(); ++j) {
      for (std::size_t i = 0; i < sub.nx(); ++i) {
        into(i + static_cast<std::size_t>(at[0]), j + static_cast<std::size_t>(at[1]),
             k + static_cast<std::size_t>(at[2])) = sub(i, j, k);
      }
    }
  }
}

template VoxelGrid crop(const VoxelGrid&, const BoundingBox&, const Vec3&, std::vector<std::string>*);
template BinaryMask crop(const BinaryMask&, const BoundingBox&, const Vec3&, std::vector<std::string>*);
template void embed(const VoxelGrid&, VoxelGrid&, const std::array<long, 3>&);
template void embed(const BinaryMask&, BinaryMask&, const std::array<long, 3>&);

}  // namespace negvol
