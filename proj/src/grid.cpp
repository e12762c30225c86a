#include "negvol/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "negvol/parallel.hpp"

namespace negvol {

void GridGeometry::validate() const {
  for (std::size_t a = 0; a < 3; ++a) {
    if (dims[a] == 0) fail(ErrorKind::Config, "grid dims must be positive");
    if (!std::isfinite(spacing[a]) || spacing[a] <= 0.0) {
      fail(ErrorKind::Config, "grid spacing must be finite and positive");
    }
    if (!std::isfinite(origin[a])) fail(ErrorKind::Config, "grid origin must be finite");
  }
}

std::size_t count(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.values()) n += v != 0;
  return n;
}

double volume_mm3(const BinaryMask& m) {
  return static_cast<double>(count(m)) * m.geometry().voxel_volume();
}

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what) {
  if (!(a == b)) fail(ErrorKind::Geometry, std::string(what) + ": grid geometry mismatch");
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op, const char* what) {
  require_same_geometry(a.geometry(), b.geometry(), what);
  BinaryMask out(a.geometry());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = op(a[n] != 0, b[n] != 0) ? 1 : 0;
  return out;
}

}  // namespace

BinaryMask complement(const BinaryMask& m) {
  BinaryMask out(m.geometry());
  for (std::size_t n = 0; n < m.size(); ++n) out[n] = m[n] ? 0 : 1;
  return out;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; }, "mask_and");
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; }, "mask_or");
}

BinaryMask mask_andnot(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && !y; }, "mask_andnot");
}

bool is_subset(const BinaryMask& m, const BinaryMask& of) {
  require_same_geometry(m.geometry(), of.geometry(), "is_subset");
  for (std::size_t n = 0; n < m.size(); ++n) {
    if (m[n] && !of[n]) return false;
  }
  return true;
}

VoxelGrid normalize_minmax(const VoxelGrid& g) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (float v : g.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::Io, "normalize_minmax: non-finite value in grid");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  VoxelGrid out(g.geometry(), 0.0f);
  if (!(hi > lo)) return out;
  const double range = static_cast<double>(hi) - lo;
  for (std::size_t n = 0; n < g.size(); ++n) {
    out[n] = static_cast<float>((static_cast<double>(g[n]) - lo) / range);
  }
  return out;
}

namespace {

// Indices of local maxima, plateaus counted once at their first bin. The
// histogram is treated as zero beyond both ends, so a peak in the last bin
// counts.
std::vector<std::size_t> local_maxima(const std::vector<double>& h) {
  std::vector<std::size_t> idx;
  int direction = 1;
  std::size_t plateau = 0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (direction > 0) {
      if (h[i + 1] < h[i]) {
        direction = -1;
        idx.push_back(plateau);
      } else if (h[i + 1] > h[i]) {
        plateau = i + 1;
      }
    } else if (h[i + 1] > h[i]) {
      direction = 1;
      plateau = i + 1;
    }
  }
  if (direction > 0 && !h.empty() && h[plateau] > 0.0) idx.push_back(plateau);
  return idx;
}

constexpr int kMaxSmoothingPasses = 10000;

}  // namespace

double minimum_method_threshold(std::span<const float> values, std::size_t bins) {
  if (bins < 16) fail(ErrorKind::Config, "threshold_minimum: bins must be >= 16");
  std::vector<double> hist(bins, 0.0);
  for (float v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::Io, "threshold_minimum: non-finite value");
    const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
    auto b = static_cast<std::size_t>(c * static_cast<double>(bins));
    hist[std::min(b, bins - 1)] += 1.0;
  }

  // At least one pass; stop as soon as fewer than three maxima remain.
  std::vector<double> tmp(bins);
  std::vector<std::size_t> maxima;
  for (int pass = 0; pass < kMaxSmoothingPasses; ++pass) {
    for (std::size_t i = 0; i < bins; ++i) {
      const double left = hist[i == 0 ? 0 : i - 1];
      const double right = hist[i + 1 == bins ? i : i + 1];
      tmp[i] = (left + hist[i] + right) / 3.0;
    }
    hist.swap(tmp);
    maxima = local_maxima(hist);
    if (maxima.size() < 3) break;
  }
  if (maxima.size() != 2) {
    fail(ErrorKind::Degenerate,
         "threshold_minimum: histogram did not become bimodal (" +
             std::to_string(maxima.size()) + " maxima)");
  }
  std::size_t best = maxima[0];
  for (std::size_t i = maxima[0]; i <= maxima[1]; ++i) {
    if (hist[i] < hist[best]) best = i;
  }
  return (static_cast<double>(best) + 0.5) / static_cast<double>(bins);
}

BinaryMask threshold_above(const VoxelGrid& g, double threshold) {
  BinaryMask out(g.geometry());
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = g[n] > threshold ? 1 : 0;
  return out;
}

BinaryMask threshold_minimum(const VoxelGrid& g, std::size_t bins) {
  return threshold_above(g, minimum_method_threshold(g.values(), bins));
}

namespace {

// Keys cubic convolution kernel, a = -0.5.
double cubic_weight(double t) {
  t = std::abs(t);
  constexpr double a = -0.5;
  if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
  if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
  return 0.0;
}

long clampl(long v, std::size_t n) {
  return v < 0 ? 0 : (v >= static_cast<long>(n) ? static_cast<long>(n) - 1 : v);
}

double clampd(double v, std::size_t n) {
  return std::clamp(v, 0.0, static_cast<double>(n - 1));
}

}  // namespace

VoxelGrid resample(const VoxelGrid& g, const Dims& new_dims, ResampleMethod method) {
  for (auto d : new_dims) {
    if (d < 2) fail(ErrorKind::Config, "resample: new dims must be >= 2 per axis");
  }
  const GridGeometry& src = g.geometry();
  GridGeometry dst;
  dst.dims = new_dims;
  for (int a = 0; a < 3; ++a) {
    const double ratio = static_cast<double>(src.dims[a]) / static_cast<double>(new_dims[a]);
    dst.spacing[a] = src.spacing[a] * ratio;
    dst.origin[a] = src.origin[a] - 0.5 * src.spacing[a] + 0.5 * dst.spacing[a];
  }
  VoxelGrid out(dst);

  // Source continuous index of destination voxel center along axis a.
  auto source_coord = [&](int a, std::size_t i) {
    if (src.dims[a] == new_dims[a]) return static_cast<double>(i);
    const double ratio = static_cast<double>(src.dims[a]) / static_cast<double>(new_dims[a]);
    return (static_cast<double>(i) + 0.5) * ratio - 0.5;
  };

  parallel_for(0, dst.nz(), [&](std::size_t k) {
    const double z = clampd(source_coord(2, k), src.nz());
    for (std::size_t j = 0; j < dst.ny(); ++j) {
      const double y = clampd(source_coord(1, j), src.ny());
      for (std::size_t i = 0; i < dst.nx(); ++i) {
        const double x = clampd(source_coord(0, i), src.nx());
        double v = 0.0;
        switch (method) {
          case ResampleMethod::Nearest:
            v = g(static_cast<std::size_t>(std::lround(x)), static_cast<std::size_t>(std::lround(y)),
                  static_cast<std::size_t>(std::lround(z)));
            break;
          case ResampleMethod::Trilinear: {
            const long x0 = static_cast<long>(std::floor(x));
            const long y0 = static_cast<long>(std::floor(y));
            const long z0 = static_cast<long>(std::floor(z));
            const double fx = x - x0, fy = y - y0, fz = z - z0;
            for (int c = 0; c < 8; ++c) {
              const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
              const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
              if (w == 0.0) continue;
              v += w * g.get_clamped(x0 + dx, y0 + dy, z0 + dz);
            }
            break;
          }
          case ResampleMethod::BicubicSlices: {
            const long x0 = static_cast<long>(std::floor(x));
            const long y0 = static_cast<long>(std::floor(y));
            const long z0 = static_cast<long>(std::floor(z));
            const double fz = z - z0;
            for (int dz = 0; dz < 2; ++dz) {
              const double wz = dz ? fz : 1.0 - fz;
              if (wz == 0.0) continue;
              const long zz = clampl(z0 + dz, src.nz());
              double slice = 0.0;
              for (long dy = -1; dy <= 2; ++dy) {
                const double wy = cubic_weight(y - static_cast<double>(y0 + dy));
                if (wy == 0.0) continue;
                const long yy = clampl(y0 + dy, src.ny());
                for (long dx = -1; dx <= 2; ++dx) {
                  const double wx = cubic_weight(x - static_cast<double>(x0 + dx));
                  if (wx == 0.0) continue;
                  slice += wx * wy * g(clampl(x0 + dx, src.nx()), yy, zz);
                }
              }
              v += wz * slice;
            }
            break;
          }
        }
        out(i, j, k) = static_cast<float>(v);
      }
    }
  });
  return out;
}

}  // namespace negvol
