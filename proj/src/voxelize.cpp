#include "negvol/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace negvol {

namespace {

void stamp_surface(const TriangleMesh& mesh, BinaryMask& out) {
  const auto& g = out.geometry();
  const double max_edge = g.spacing.minCoeff();
  const long dims[3] = {static_cast<long>(g.nx()), static_cast<long>(g.ny()), static_cast<long>(g.nz())};
  struct Fragment {
    Vec3 a, b, c;
  };
  std::vector<Fragment> stack;
  for (const auto& t : mesh.faces) {
    stack.push_back({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]});
    while (!stack.empty()) {
      const Fragment fr = stack.back();
      stack.pop_back();
      const double lab = (fr.b - fr.a).norm(), lbc = (fr.c - fr.b).norm(), lca = (fr.a - fr.c).norm();
      const double longest = std::max({lab, lbc, lca});
      if (longest >= max_edge) {
        if (longest == lab) {
          const Vec3 m = 0.5 * (fr.a + fr.b);
          stack.push_back({fr.a, m, fr.c});
          stack.push_back({m, fr.b, fr.c});
        } else if (longest == lbc) {
          const Vec3 m = 0.5 * (fr.b + fr.c);
          stack.push_back({fr.a, fr.b, m});
          stack.push_back({fr.a, m, fr.c});
        } else {
          const Vec3 m = 0.5 * (fr.c + fr.a);
          stack.push_back({fr.a, fr.b, m});
          stack.push_back({m, fr.b, fr.c});
        }
        continue;
      }
      const Vec3 ia = g.to_index(fr.a), ib = g.to_index(fr.b), ic = g.to_index(fr.c);
      const Vec3 lo = ia.cwiseMin(ib).cwiseMin(ic);
      const Vec3 hi = ia.cwiseMax(ib).cwiseMax(ic);
      long r0[3], r1[3];
      bool empty = false;
      for (int a = 0; a < 3; ++a) {
        r0[a] = std::max(0L, static_cast<long>(std::floor(lo[a] + 0.5)));
        r1[a] = std::min(dims[a] - 1, static_cast<long>(std::floor(hi[a] + 0.5)));
        empty = empty || r0[a] > r1[a];
      }
      if (empty) continue;
      for (long k = r0[2]; k <= r1[2]; ++k) {
        for (long j = r0[1]; j <= r1[1]; ++j) {
          for (long i = r0[0]; i <= r1[0]; ++i) {
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)) = 1;
          }
        }
      }
    }
  }
}

struct Crossing {
  double x;
  int sign;
  bool operator<(const Crossing& o) const { return x < o.x || (x == o.x && sign < o.sign); }
};

// Sign of the edge function of p against the undirected edge {u, v}, with
// p nudged by (e, e^2) when it lies exactly on the edge's line. The value
// is computed from a canonical endpoint order, so both faces sharing the
// edge see the exact negation of each other.
int edge_side(const Eigen::Vector2d& u, const Eigen::Vector2d& v, const Eigen::Vector2d& p, double& raw) {
  const bool forward = u.x() < v.x() || (u.x() == v.x() && u.y() < v.y());
  const Eigen::Vector2d& a = forward ? u : v;
  const Eigen::Vector2d& b = forward ? v : u;
  const double w = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  int s;
  if (w != 0.0) {
    s = w > 0.0 ? 1 : -1;
  } else if (b.y() != a.y()) {
    s = b.y() > a.y() ? -1 : 1;
  } else {
    s = b.x() > a.x() ? 1 : -1;
  }
  raw = forward ? w : -w;
  return forward ? s : -s;
}

void fill_solid(const TriangleMesh& mesh, BinaryMask& out) {
  const auto& g = out.geometry();
  const std::size_t nx = g.nx(), ny = g.ny(), nz = g.nz();
  std::vector<Vec3> idx(mesh.vertices.size());
  for (std::size_t v = 0; v < idx.size(); ++v) idx[v] = g.to_index(mesh.vertices[v]);

  std::vector<std::vector<Crossing>> rows(ny * nz);
  for (const auto& f : mesh.faces) {
    const Vec3& A = idx[f[0]];
    const Vec3& B = idx[f[1]];
    const Vec3& C = idx[f[2]];
    const Eigen::Vector2d a(A.y(), A.z()), b(B.y(), B.z()), c(C.y(), C.z());
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    // Edge-on faces are never crossed by the nudged rays.
    if (area == 0.0) continue;
    const int orient = area > 0.0 ? 1 : -1;
    const double ylo = std::min({a.x(), b.x(), c.x()}), yhi = std::max({a.x(), b.x(), c.x()});
    const double zlo = std::min({a.y(), b.y(), c.y()}), zhi = std::max({a.y(), b.y(), c.y()});
    const long j0 = std::max(0L, static_cast<long>(std::ceil(ylo)));
    const long j1 = std::min(static_cast<long>(ny) - 1, static_cast<long>(std::floor(yhi)));
    const long k0 = std::max(0L, static_cast<long>(std::ceil(zlo)));
    const long k1 = std::min(static_cast<long>(nz) - 1, static_cast<long>(std::floor(zhi)));
    for (long k = k0; k <= k1; ++k) {
      for (long j = j0; j <= j1; ++j) {
        const Eigen::Vector2d p(static_cast<double>(j), static_cast<double>(k));
        double wa, wb, wc;  // opposite vertex a, b, c
        if (edge_side(b, c, p, wa) != orient) continue;
        if (edge_side(c, a, p, wb) != orient) continue;
        if (edge_side(a, b, p, wc) != orient) continue;
        const double x = (wa * A.x() + wb * B.x() + wc * C.x()) / area;
        rows[static_cast<std::size_t>(j) + ny * static_cast<std::size_t>(k)].push_back({x, orient});
      }
    }
  }

  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      auto& row = rows[j + ny * k];
      if (row.empty()) continue;
      std::sort(row.begin(), row.end());
      // Winding number of a center = signed crossings at or beyond it.
      int winding = 0;
      std::size_t next = row.size();
      for (std::size_t i = nx; i-- > 0;) {
        const double xi = static_cast<double>(i);
        while (next > 0 && row[next - 1].x >= xi) winding += row[--next].sign;
        if (winding > 0) out(i, j, k) = 1;
      }
    }
  }
}

}  // namespace

BinaryMask voxelize(const TriangleMesh& mesh, const GridGeometry& templ, const VoxelizeOptions& options) {
  templ.validate();
  BinaryMask result(templ);
  if (mesh.faces.empty()) return result;
  validate(mesh);
  if (options.surface_only) {
    stamp_surface(mesh, result);
  } else {
    if (!is_closed(mesh)) {
      fail(ErrorKind::Geometry, "voxelize: mesh is not watertight (use surface-only stamping for open meshes)");
    }
    fill_solid(mesh, result);
  }
  return result;
}

}  // namespace negvol
