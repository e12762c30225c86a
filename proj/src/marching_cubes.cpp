#include "negvol/marching_cubes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "negvol/filters.hpp"

namespace negvol {

namespace {

// Corner c of a cell sits at offset (c&1, (c>>1)&1, (c>>2)&1).
using Corner = int;

struct CellEdge {
  Corner a;  // lower corner
  Corner b;
  int axis;
};

struct CellFace {
  int axis;
  int side;
  std::array<Corner, 4> ccw;  // counter-clockwise seen from outside the cell
};

struct CaseTable {
  std::array<CellEdge, 12> edges{};
  std::array<CellFace, 6> faces{};
  // Triangles per configuration. Vertex ids 0..11 are cell edges; 12+l is
  // the centroid of loop `l` in `centroid_loops`.
  std::array<std::vector<std::array<int, 3>>, 256> triangles;
  std::array<std::vector<std::vector<int>>, 256> centroid_loops;

  int edge_between(Corner p, Corner q) const {
    for (int e = 0; e < 12; ++e) {
      if ((edges[e].a == p && edges[e].b == q) || (edges[e].a == q && edges[e].b == p)) return e;
    }
    return -1;
  }
};

Vec3 corner_pos(Corner c) { return Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

bool edges_share_face(const CaseTable& t, int e1, int e2) {
  for (const auto& f : t.faces) {
    auto on = [&](int e) {
      return ((t.edges[e].a >> f.axis) & 1) == f.side && ((t.edges[e].b >> f.axis) & 1) == f.side;
    };
    if (on(e1) && on(e2)) return true;
  }
  return false;
}

CaseTable build_table() {
  CaseTable t;
  int ne = 0;
  for (Corner a = 0; a < 8; ++a) {
    for (int axis = 0; axis < 3; ++axis) {
      if ((a >> axis) & 1) continue;
      t.edges[ne++] = {a, a | (1 << axis), axis};
    }
  }

  int nf = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      CellFace f{axis, side, {}};
      Vec3 normal = Vec3::Zero();
      normal[axis] = side ? 1.0 : -1.0;
      const Vec3 u = Vec3::Unit((axis + 1) % 3);
      const Vec3 v = normal.cross(u);
      std::vector<std::pair<double, Corner>> ring;
      for (Corner c = 0; c < 8; ++c) {
        if (((c >> axis) & 1) != side) continue;
        const Vec3 d = corner_pos(c) - Vec3(0.5, 0.5, 0.5);
        ring.emplace_back(std::atan2(d.dot(v), d.dot(u)), c);
      }
      std::sort(ring.begin(), ring.end());
      for (int i = 0; i < 4; ++i) f.ccw[i] = ring[i].second;
      t.faces[nf++] = f;
    }
  }

  for (int config = 1; config < 255; ++config) {
    auto inside = [config](Corner c) { return ((config >> c) & 1) != 0; };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& f : t.faces) {
      // Crossings in ccw order; +1 entering the inside run, -1 leaving it.
      std::vector<std::pair<int, int>> crossings;
      for (int i = 0; i < 4; ++i) {
        const Corner p = f.ccw[i], q = f.ccw[(i + 1) % 4];
        if (inside(p) == inside(q)) continue;
        crossings.emplace_back(t.edge_between(p, q), inside(q) ? 1 : -1);
      }
      const std::size_t m = crossings.size();
      for (std::size_t i = 0; i < m; ++i) {
        if (crossings[i].second != 1) continue;
        for (std::size_t s = 1; s < m; ++s) {
          const auto& c = crossings[(i + s) % m];
          if (c.second == -1) {
            next[crossings[i].first] = c.first;
            break;
          }
        }
      }
    }

    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || used[start]) continue;
      std::vector<int> loop;
      for (int e = start; !used[e]; e = next[e]) {
        used[e] = true;
        loop.push_back(e);
      }
      const int m = static_cast<int>(loop.size());
      if (m == 3) {
        t.triangles[config].push_back({loop[0], loop[1], loop[2]});
        continue;
      }
      // Fan from an apex whose diagonals stay off the cell faces; a diagonal
      // on a face could coincide with one from the neighboring cell.
      int apex = -1;
      for (int k = 0; k < m && apex < 0; ++k) {
        bool ok = true;
        for (int s = 2; s <= m - 2 && ok; ++s) {
          ok = !edges_share_face(t, loop[k], loop[(k + s) % m]);
        }
        if (ok) apex = k;
      }
      if (apex >= 0) {
        for (int s = 1; s + 1 < m; ++s) {
          t.triangles[config].push_back({loop[apex], loop[(apex + s) % m], loop[(apex + s + 1) % m]});
        }
      } else {
        const int c = 12 + static_cast<int>(t.centroid_loops[config].size());
        t.centroid_loops[config].push_back(loop);
        for (int s = 0; s < m; ++s) {
          t.triangles[config].push_back({c, loop[s], loop[(s + 1) % m]});
        }
      }
    }
  }

  // Orient so normals point away from inside corners: check the single-corner case.
  {
    const auto& tri = t.triangles[1][0];
    auto mid = [&](int e) -> Vec3 { return 0.5 * (corner_pos(t.edges[e].a) + corner_pos(t.edges[e].b)); };
    const Vec3 n = (mid(tri[1]) - mid(tri[0])).cross(mid(tri[2]) - mid(tri[0]));
    const Vec3 away = (mid(tri[0]) + mid(tri[1]) + mid(tri[2])) / 3.0 - corner_pos(0);
    if (n.dot(away) < 0.0) {
      for (auto& list : t.triangles) {
        for (auto& tr : list) std::swap(tr[1], tr[2]);
      }
    }
  }
  return t;
}

const CaseTable& table() {
  static const CaseTable t = build_table();
  return t;
}

}  // namespace

TriangleMesh extract_isosurface(const VoxelGrid& field, double iso) {
  const CaseTable& t = table();
  const GridGeometry& geo = field.geometry();
  const long nx = static_cast<long>(geo.nx());
  const long ny = static_cast<long>(geo.ny());
  const long nz = static_cast<long>(geo.nz());
  const float outside = static_cast<float>(iso - 1.0);

  auto value = [&](long i, long j, long k) { return field.get_or(i, j, k, outside); };

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  const std::uint64_t px = nx + 2, py = ny + 2;
  auto grid_edge_key = [&](long i, long j, long k, int axis) {
    return ((static_cast<std::uint64_t>(k + 1) * py + static_cast<std::uint64_t>(j + 1)) * px +
            static_cast<std::uint64_t>(i + 1)) * 3 + static_cast<std::uint64_t>(axis);
  };

  std::array<float, 8> cv{};
  std::array<std::uint32_t, 12> ev{};
  std::vector<std::uint32_t> centroid_ids;

  for (long k = -1; k < nz; ++k) {
    for (long j = -1; j < ny; ++j) {
      for (long i = -1; i < nx; ++i) {
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          cv[c] = value(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          if (cv[c] > iso) config |= 1 << c;
        }
        if (config == 0 || config == 255) continue;

        for (int e = 0; e < 12; ++e) {
          const auto& ce = t.edges[e];
          const bool crossing = (((config >> ce.a) ^ (config >> ce.b)) & 1) != 0;
          if (!crossing) continue;
          const long ai = i + (ce.a & 1), aj = j + ((ce.a >> 1) & 1), ak = k + ((ce.a >> 2) & 1);
          const auto key = grid_edge_key(ai, aj, ak, ce.axis);
          auto it = edge_vertex.find(key);
          if (it == edge_vertex.end()) {
            const double va = cv[ce.a], vb = cv[ce.b];
            const double frac = std::clamp((iso - va) / (vb - va), 0.0, 1.0);
            Vec3 idx(static_cast<double>(ai), static_cast<double>(aj), static_cast<double>(ak));
            idx[ce.axis] += frac;
            const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
            mesh.vertices.push_back(geo.world(idx.x(), idx.y(), idx.z()));
            it = edge_vertex.emplace(key, id).first;
          }
          ev[e] = it->second;
        }

        centroid_ids.clear();
        for (const auto& loop : t.centroid_loops[config]) {
          Vec3 c = Vec3::Zero();
          for (int e : loop) c += mesh.vertices[ev[e]];
          centroid_ids.push_back(static_cast<std::uint32_t>(mesh.vertices.size()));
          mesh.vertices.push_back(c / static_cast<double>(loop.size()));
        }
        auto vid = [&](int id) { return id < 12 ? ev[id] : centroid_ids[id - 12]; };
        for (const auto& tri : t.triangles[config]) {
          mesh.faces.push_back({vid(tri[0]), vid(tri[1]), vid(tri[2])});
        }
      }
    }
  }
  return mesh;
}

TriangleMesh extract_surface(const BinaryMask& m, const SurfaceOptions& options) {
  if (!(options.iso > 0.0 && options.iso < 1.0)) {
    fail(ErrorKind::Config, "extract_surface: iso must be in (0, 1)");
  }
  if (count(m) == 0) fail(ErrorKind::Geometry, "extract_surface: mask is empty");
  VoxelGrid field(m.geometry());
  for (std::size_t n = 0; n < m.size(); ++n) field[n] = m[n] ? 1.0f : 0.0f;
  if (options.smooth_sigma_voxels > 0.0) {
    // The smoothed field only moves vertices along their cell edges: values
    // are clamped to the mask's side of iso so the topology is the mask's.
    const VoxelGrid smooth =
        gaussian_smooth(field, options.smooth_sigma_voxels * m.geometry().spacing.minCoeff());
    const double margin = 0.02 * std::min(options.iso, 1.0 - options.iso);
    for (std::size_t n = 0; n < m.size(); ++n) {
      field[n] = m[n] ? static_cast<float>(std::max<double>(smooth[n], options.iso + margin))
                      : static_cast<float>(std::min<double>(smooth[n], options.iso - margin));
    }
  }
  TriangleMesh mesh = extract_isosurface(field, options.iso);
  if (mesh.empty()) fail(ErrorKind::Geometry, "extract_surface: no surface at the requested iso level");
  return mesh;
}

}  // namespace negvol
