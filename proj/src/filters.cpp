#include "negvol/filters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "negvol/parallel.hpp"

namespace negvol {

namespace {

std::vector<double> gaussian_kernel(double sigma_vox) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_vox)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    k[t + radius] = std::exp(-0.5 * (t * t) / (sigma_vox * sigma_vox));
    sum += k[t + radius];
  }
  for (auto& w : k) w /= sum;
  return k;
}

// Convolves along one axis with clamped borders.
VoxelGrid convolve_axis(const VoxelGrid& g, int axis, const std::vector<double>& kernel) {
  const GridGeometry& geo = g.geometry();
  VoxelGrid out(geo);
  const long radius = static_cast<long>(kernel.size() / 2);
  const long n = static_cast<long>(geo.dims[axis]);
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? geo.nx() : geo.nx() * geo.ny());
  parallel_for(0, geo.nz(), [&](std::size_t k) {
    for (std::size_t j = 0; j < geo.ny(); ++j) {
      for (std::size_t i = 0; i < geo.nx(); ++i) {
        const std::size_t base = geo.index(i, j, k);
        const long pos = static_cast<long>(axis == 0 ? i : (axis == 1 ? j : k));
        const std::size_t line0 = base - static_cast<std::size_t>(pos) * stride;
        double acc = 0.0;
        for (long t = -radius; t <= radius; ++t) {
          const long q = std::clamp(pos + t, 0L, n - 1);
          acc += kernel[t + radius] * g[line0 + static_cast<std::size_t>(q) * stride];
        }
        out[base] = static_cast<float>(acc);
      }
    }
  });
  return out;
}

using Offset = std::array<int, 3>;

// One representative per +/- pair of the 26 neighbor directions.
std::vector<Offset> half_directions() {
  std::vector<Offset> dirs;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Offset d{dx, dy, dz};
        if (d == Offset{0, 0, 0}) continue;
        // Keep the lexicographically positive member of each pair.
        const bool positive = dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0)));
        if (positive) dirs.push_back(d);
      }
    }
  }
  return dirs;
}

}  // namespace

VoxelGrid gaussian_smooth(const VoxelGrid& g, double sigma_mm) {
  if (!(sigma_mm > 0.0)) fail(ErrorKind::Config, "gaussian_smooth: sigma must be positive");
  VoxelGrid cur = g;
  for (int axis = 0; axis < 3; ++axis) {
    const double sigma_vox = sigma_mm / g.geometry().spacing[axis];
    if (g.geometry().dims[axis] < 2) continue;
    cur = convolve_axis(cur, axis, gaussian_kernel(sigma_vox));
  }
  return cur;
}

BinaryMask canny3d(const VoxelGrid& g, double sigma_mm, double low, double high) {
  if (!(low > 0.0 && low < high && high < 1.0)) {
    fail(ErrorKind::Config, "canny3d: thresholds must satisfy 0 < low < high < 1");
  }
  const GridGeometry& geo = g.geometry();
  const double min_spacing = geo.spacing.minCoeff();
  if (!(sigma_mm >= 0.5 * min_spacing)) {
    fail(ErrorKind::Config, "canny3d: sigma is below half the smallest spacing");
  }

  const VoxelGrid s = gaussian_smooth(g, sigma_mm);
  const long nx = static_cast<long>(geo.nx());
  const long ny = static_cast<long>(geo.ny());

  std::vector<float> mag(s.size());
  std::vector<std::uint8_t> dir_index(s.size());
  std::vector<std::int8_t> dir_sign(s.size());

  const auto dirs = half_directions();
  std::vector<Vec3> dir_units;
  for (const auto& d : dirs) {
    dir_units.push_back(Vec3(d[0] * geo.spacing.x(), d[1] * geo.spacing.y(), d[2] * geo.spacing.z())
                            .normalized());
  }

  parallel_for(0, geo.nz(), [&](std::size_t kk) {
    const long k = static_cast<long>(kk);
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        const Vec3 grad((s.get_clamped(i + 1, j, k) - s.get_clamped(i - 1, j, k)) / (2.0 * geo.spacing.x()),
                        (s.get_clamped(i, j + 1, k) - s.get_clamped(i, j - 1, k)) / (2.0 * geo.spacing.y()),
                        (s.get_clamped(i, j, k + 1) - s.get_clamped(i, j, k - 1)) / (2.0 * geo.spacing.z()));
        const std::size_t n = geo.index(i, j, k);
        mag[n] = static_cast<float>(grad.norm());
        std::size_t best = 0;
        double best_dot = -1.0;
        for (std::size_t d = 0; d < dir_units.size(); ++d) {
          const double dot = std::abs(grad.dot(dir_units[d]));
          if (dot > best_dot) {
            best_dot = dot;
            best = d;
          }
        }
        dir_index[n] = static_cast<std::uint8_t>(best);
        dir_sign[n] = grad.dot(dir_units[best]) >= 0.0 ? 1 : -1;
      }
    }
  });

  const float max_mag = *std::max_element(mag.begin(), mag.end());
  BinaryMask edges(geo);
  if (!(max_mag > 0.0f)) return edges;

  // Of two equal maxima straddling an edge, the one on the bright side
  // (further along the gradient) is kept.
  const float eps = 1e-6f * max_mag;
  auto mag_at = [&](long i, long j, long k) {
    return geo.contains(i, j, k) ? mag[geo.index(i, j, k)] : 0.0f;
  };
  std::vector<std::uint8_t> candidate(s.size(), 0);
  parallel_for(0, geo.nz(), [&](std::size_t kk) {
    const long k = static_cast<long>(kk);
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        const std::size_t n = geo.index(i, j, k);
        const float m = mag[n];
        if (!(m >= static_cast<float>(low) * max_mag)) continue;
        const Offset& d = dirs[dir_index[n]];
        const int sg = dir_sign[n];
        const float fwd = mag_at(i + sg * d[0], j + sg * d[1], k + sg * d[2]);
        const float back = mag_at(i - sg * d[0], j - sg * d[1], k - sg * d[2]);
        if (m >= back - eps && m > fwd + eps) candidate[n] = 1;
      }
    }
  });

  const float strong = static_cast<float>(high) * max_mag;
  std::deque<std::size_t> queue;
  for (std::size_t n = 0; n < candidate.size(); ++n) {
    if (candidate[n] && mag[n] >= strong) {
      edges[n] = 1;
      queue.push_back(n);
    }
  }
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop_front();
    const long i = static_cast<long>(n % geo.nx());
    const long j = static_cast<long>((n / geo.nx()) % geo.ny());
    const long k = static_cast<long>(n / (geo.nx() * geo.ny()));
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!geo.contains(i + dx, j + dy, k + dz)) continue;
          const std::size_t q = geo.index(i + dx, j + dy, k + dz);
          if (candidate[q] && !edges[q]) {
            edges[q] = 1;
            queue.push_back(q);
          }
        }
      }
    }
  }
  return edges;
}

VoxelGrid median_filter_slices(const VoxelGrid& g, int radius) {
  if (radius < 1) fail(ErrorKind::Config, "median_filter_slices: radius must be >= 1");
  const GridGeometry& geo = g.geometry();
  VoxelGrid out(geo);
  const long nx = static_cast<long>(geo.nx());
  const long ny = static_cast<long>(geo.ny());
  parallel_for(0, geo.nz(), [&](std::size_t k) {
    std::vector<float> window;
    window.reserve((2 * radius + 1) * (2 * radius + 1));
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        window.clear();
        for (long dy = -radius; dy <= radius; ++dy) {
          const long y = std::clamp(j + dy, 0L, ny - 1);
          for (long dx = -radius; dx <= radius; ++dx) {
            window.push_back(g(std::clamp(i + dx, 0L, nx - 1), y, k));
          }
        }
        auto mid = window.begin() + static_cast<long>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        out(i, j, k) = *mid;
      }
    }
  });
  return out;
}

}  // namespace negvol
