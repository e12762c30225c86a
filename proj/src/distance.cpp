#include "negvol/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "negvol/parallel.hpp"

namespace negvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One pass of the lower-envelope squared distance transform over a line of n
// samples spaced `h` apart: out[q] = min_p h^2 (q-p)^2 + f[p].
void envelope_1d(const double* f, double* out, std::size_t n, double h, std::vector<std::size_t>& v,
                 std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (!any) {
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      k = 0;
      any = true;
      continue;
    }
    const double xq = static_cast<double>(q) * h;
    double s;
    while (true) {
      const double xv = static_cast<double>(v[k]) * h;
      s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
      // z[0] is -inf, so this stops at k == 0.
      if (s <= z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!any) {
    std::fill(out, out + n, kInf);
    return;
  }
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double xq = static_cast<double>(q) * h;
    while (z[j + 1] < xq) ++j;
    const double d = xq - static_cast<double>(v[j]) * h;
    out[q] = d * d + f[v[j]];
  }
}

// Squared distance (mm^2) from every voxel center to the nearest true center.
std::vector<double> squared_edt(const BinaryMask& target) {
  const GridGeometry& geo = target.geometry();
  std::vector<double> d(target.size());
  for (std::size_t n = 0; n < target.size(); ++n) d[n] = target[n] ? 0.0 : kInf;

  const std::size_t nx = geo.nx(), ny = geo.ny(), nz = geo.nz();
  // x lines
  parallel_for(0, nz, [&](std::size_t k) {
    std::vector<double> line(nx), res(nx), z;
    std::vector<std::size_t> v;
    for (std::size_t j = 0; j < ny; ++j) {
      double* row = &d[geo.index(0, j, k)];
      std::copy(row, row + nx, line.begin());
      envelope_1d(line.data(), res.data(), nx, geo.spacing.x(), v, z);
      std::copy(res.begin(), res.end(), row);
    }
  });
  // y lines
  parallel_for(0, nz, [&](std::size_t k) {
    std::vector<double> line(ny), res(ny), z;
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) line[j] = d[geo.index(i, j, k)];
      envelope_1d(line.data(), res.data(), ny, geo.spacing.y(), v, z);
      for (std::size_t j = 0; j < ny; ++j) d[geo.index(i, j, k)] = res[j];
    }
  });
  // z lines
  parallel_for(0, ny, [&](std::size_t j) {
    std::vector<double> line(nz), res(nz), z;
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t k = 0; k < nz; ++k) line[k] = d[geo.index(i, j, k)];
      envelope_1d(line.data(), res.data(), nz, geo.spacing.z(), v, z);
      for (std::size_t k = 0; k < nz; ++k) d[geo.index(i, j, k)] = res[k];
    }
  });
  return d;
}

}  // namespace

VoxelGrid distance_to(const BinaryMask& target) {
  const auto d2 = squared_edt(target);
  VoxelGrid out(target.geometry());
  for (std::size_t n = 0; n < d2.size(); ++n) out[n] = static_cast<float>(std::sqrt(d2[n]));
  return out;
}

VoxelGrid distance_field(const BinaryMask& m) {
  const std::size_t inside = count(m);
  if (inside == 0 || inside == m.size()) {
    fail(ErrorKind::Geometry, "distance_field: mask is empty or full, sign is undefined");
  }
  const auto to_inside = squared_edt(m);
  const auto to_outside = squared_edt(complement(m));
  const double h = 0.5 * m.geometry().spacing.minCoeff();
  VoxelGrid out(m.geometry());
  for (std::size_t n = 0; n < m.size(); ++n) {
    out[n] = m[n] ? static_cast<float>(-(std::sqrt(to_outside[n]) - h))
                  : static_cast<float>(std::sqrt(to_inside[n]) - h);
  }
  return out;
}

double sample_trilinear(const VoxelGrid& g, const Vec3& p) {
  const GridGeometry& geo = g.geometry();
  const Vec3 idx = geo.to_index(p);
  double c[3];
  long base[3];
  for (int a = 0; a < 3; ++a) {
    const double hi = static_cast<double>(geo.dims[a] - 1);
    c[a] = std::clamp(idx[a], 0.0, hi);
    base[a] = std::min(static_cast<long>(std::floor(c[a])), static_cast<long>(geo.dims[a]) - 2);
    if (base[a] < 0) base[a] = 0;
    c[a] -= static_cast<double>(base[a]);
  }
  double v = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
    const double w = (dx ? c[0] : 1.0 - c[0]) * (dy ? c[1] : 1.0 - c[1]) * (dz ? c[2] : 1.0 - c[2]);
    if (w == 0.0) continue;
    v += w * g.get_clamped(base[0] + dx, base[1] + dy, base[2] + dz);
  }
  return v;
}

}  // namespace negvol
