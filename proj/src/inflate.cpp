#include "negvol/inflate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <iomanip>
#include <numeric>
#include <unordered_map>

#include "negvol/distance.hpp"
#include "negvol/marching_cubes.hpp"
#include "negvol/morphology.hpp"
#include "negvol/parallel.hpp"
#include "negvol/voxelize.hpp"

namespace negvol {

void InflationConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "inflation config: " + what); };
  if (!(step_mm > 0.0) || !std::isfinite(step_mm)) bad("step_mm must be > 0");
  if (!(clearance_mm >= 0.0) || !std::isfinite(clearance_mm)) bad("clearance_mm must be >= 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) bad("lambda must be in [0, 1]");
  if (smooth_every < 1) bad("smooth_every must be >= 1");
  if (max_iterations < 0) bad("max_iterations must be >= 0");
  if (!(stop_fraction >= 0.0 && stop_fraction <= 1.0)) bad("stop_fraction must be in [0, 1]");
}

void InflationConfig::validate(const GridGeometry& sdf_geometry) const {
  validate();
  const double diag = sdf_geometry.voxel_diagonal();
  if (!(step_mm < clearance_mm + diag)) {
    fail(ErrorKind::Config, "inflation config: step_mm must be < clearance_mm + voxel diagonal (" +
                                std::to_string(clearance_mm + diag) + " mm)");
  }
}

void ClipPlane::validate() const {
  if (!point.allFinite() || !normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-9) {
    fail(ErrorKind::Config, "clip plane normal must be a unit vector");
  }
}

void InflationTrace::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << std::setprecision(10);
  out << "iteration,free_count,mean_disp_mm,min_sdf_mm,volume_mm3\n";
  for (const auto& r : records) {
    out << r.iteration << ',' << r.free_count << ',' << r.mean_displacement_mm << ','
        << r.min_sdf_mm << ',' << r.volume_mm3 << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

InflationResult inflate(const TriangleMesh& mc, const VoxelGrid& tb_sdf, const InflationConfig& cfg) {
  cfg.validate(tb_sdf.geometry());
  validate(mc);
  if (!is_consistently_oriented(mc)) fail(ErrorKind::Geometry, "inflate: mesh is not closed and oriented");
  if (!(enclosed_volume(mc) > 0.0)) fail(ErrorKind::Geometry, "inflate: mesh is oriented inward");
  {
    bool neg = false, pos = false;
    for (float v : tb_sdf.values()) {
      neg = neg || v < 0.0f;
      pos = pos || v > 0.0f;
    }
    if (!neg || !pos) {
      fail(ErrorKind::Geometry, "inflate: field-domain error, confining field has no sign change");
    }
  }

  const std::size_t n = mc.vertices.size();
  std::vector<double> sdf(n);
  parallel_for(0, n, [&](std::size_t v) { sdf[v] = sample_trilinear(tb_sdf, mc.vertices[v]); });
  const auto penetrating = static_cast<std::size_t>(
      std::count_if(sdf.begin(), sdf.end(), [&](double s) { return s < cfg.clearance_mm; }));
  if (penetrating > 0) {
    fail(ErrorKind::Geometry, "inflate: initial penetration, " + std::to_string(penetrating) +
                                  " vertices closer than clearance to the confining bone");
  }

  const auto& g = tb_sdf.geometry();
  const Vec3 grid_hi(static_cast<double>(g.nx() - 1), static_cast<double>(g.ny() - 1),
                     static_cast<double>(g.nz() - 1));
  auto within = [&](const Vec3& p) {
    const Vec3 idx = g.to_index(p);
    return (idx.array() >= 0.0).all() && (idx.array() <= grid_hi.array()).all();
  };

  const auto neighbors = vertex_neighbors(mc);
  TriangleMesh mesh = mc;
  std::vector<std::uint8_t> frozen(n, 0);
  std::vector<Vec3> moved(n);
  std::size_t free_count = n;

  InflationResult result;
  result.trace.vertex_count = n;
  result.trace.initial_volume_mm3 = enclosed_volume(mc);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (static_cast<double>(free_count) < cfg.stop_fraction * static_cast<double>(n)) break;

    const auto normals = vertex_normals(mesh);
    parallel_for(0, n, [&](std::size_t v) {
      if (frozen[v]) return;
      const Vec3 p = mesh.vertices[v] + cfg.step_mm * normals[v];
      const double s = sample_trilinear(tb_sdf, p);
      // The field says nothing beyond its grid, so the grid edge also stops growth.
      if (s >= cfg.clearance_mm && within(p)) {
        mesh.vertices[v] = p;
        sdf[v] = s;
      } else {
        frozen[v] = 1;
      }
    });

    if (it % cfg.smooth_every == 0 && cfg.lambda > 0.0) {
      parallel_for(0, n, [&](std::size_t v) {
        moved[v] = mesh.vertices[v];
        if (frozen[v] || neighbors[v].empty()) return;
        Vec3 c = Vec3::Zero();
        for (auto u : neighbors[v]) c += mesh.vertices[u];
        c /= static_cast<double>(neighbors[v].size());
        const Vec3 p = mesh.vertices[v] + cfg.lambda * (c - mesh.vertices[v]);
        const double s = sample_trilinear(tb_sdf, p);
        if (s >= cfg.clearance_mm && within(p)) {
          moved[v] = p;
          sdf[v] = s;
        }
      });
      mesh.vertices.swap(moved);
    }

    free_count = n - static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), 1));
    InflationRecord rec;
    rec.iteration = it;
    rec.free_count = free_count;
    double disp = 0.0;
    for (std::size_t v = 0; v < n; ++v) disp += (mesh.vertices[v] - mc.vertices[v]).norm();
    rec.mean_displacement_mm = disp / static_cast<double>(n);
    rec.min_sdf_mm = *std::min_element(sdf.begin(), sdf.end());
    rec.volume_mm3 = enclosed_volume(mesh);
    result.trace.records.push_back(rec);
  }
  result.mesh = std::move(mesh);
  return result;
}

TriangleMesh clip(const TriangleMesh& mesh, const ClipPlane& plane, bool cap) {
  plane.validate();
  validate(mesh);
  const std::size_t n = mesh.vertices.size();
  std::vector<double> d(n);
  for (std::size_t v = 0; v < n; ++v) d[v] = plane.signed_distance(mesh.vertices[v]);

  TriangleMesh out;
  std::vector<std::uint32_t> remap(n, std::numeric_limits<std::uint32_t>::max());
  auto keep = [&](std::uint32_t v) {
    if (remap[v] == std::numeric_limits<std::uint32_t>::max()) {
      remap[v] = static_cast<std::uint32_t>(out.vertices.size());
      out.vertices.push_back(mesh.vertices[v]);
    }
    return remap[v];
  };
  std::unordered_map<std::uint64_t, std::uint32_t> cut;
  // a is kept (d <= 0), b removed (d > 0).
  auto crossing = [&](std::uint32_t a, std::uint32_t b) {
    if (d[a] == 0.0) return keep(a);
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
    auto it = cut.find(key);
    if (it != cut.end()) return it->second;
    const double t = d[a] / (d[a] - d[b]);
    const auto id = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a]));
    cut.emplace(key, id);
    return id;
  };

  for (const auto& f : mesh.faces) {
    const bool removed[3] = {d[f[0]] > 0.0, d[f[1]] > 0.0, d[f[2]] > 0.0};
    const int n_removed = removed[0] + removed[1] + removed[2];
    if (n_removed == 3) continue;
    if (n_removed == 0) {
      out.faces.push_back({keep(f[0]), keep(f[1]), keep(f[2])});
      continue;
    }
    // Walk the triangle keeping the non-positive part, in order.
    std::vector<std::uint32_t> poly;
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = f[k], b = f[(k + 1) % 3];
      const bool ra = removed[k], rb = removed[(k + 1) % 3];
      if (!ra) poly.push_back(keep(a));
      if (ra != rb) poly.push_back(ra ? crossing(b, a) : crossing(a, b));
    }
    poly.erase(std::unique(poly.begin(), poly.end()), poly.end());
    while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    for (std::size_t s = 1; s + 1 < poly.size(); ++s) {
      out.faces.push_back({poly[0], poly[s], poly[s + 1]});
    }
  }
  // Slivers from vertices lying on the plane carry no area.
  std::erase_if(out.faces, [&](const Face& f) {
    return (out.vertices[f[1]] - out.vertices[f[0]]).cross(out.vertices[f[2]] - out.vertices[f[0]]).norm() <
           2.0 * kDegenerateFaceArea;
  });
  if (out.faces.empty()) fail(ErrorKind::Geometry, "clip: plane removes the entire mesh");

  if (cap) {
    // Boundary half-edges are those whose reverse is missing.
    std::unordered_map<std::uint64_t, int> directed;
    auto key = [](std::uint32_t a, std::uint32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; };
    for (const auto& f : out.faces) {
      for (int k = 0; k < 3; ++k) ++directed[key(f[k], f[(k + 1) % 3])];
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> boundary;
    for (const auto& f : out.faces) {
      for (int k = 0; k < 3; ++k) {
        const std::uint32_t a = f[k], b = f[(k + 1) % 3];
        if (!directed.count(key(b, a))) boundary.emplace_back(a, b);
      }
    }
    if (!boundary.empty()) {
      // Group boundary edges into loops by union-find over their vertices.
      std::unordered_map<std::uint32_t, std::uint32_t> parent;
      std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
        auto it = parent.find(x);
        if (it == parent.end()) {
          parent[x] = x;
          return x;
        }
        if (it->second == x) return x;
        const std::uint32_t r = find(it->second);
        parent[x] = r;
        return r;
      };
      for (const auto& [a, b] : boundary) {
        const std::uint32_t ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
      std::unordered_map<std::uint32_t, std::pair<Vec3, std::size_t>> sums;
      for (const auto& [a, b] : boundary) {
        auto& s = sums.try_emplace(find(a), Vec3::Zero(), 0).first->second;
        s.first += out.vertices[a];
        ++s.second;
      }
      std::unordered_map<std::uint32_t, std::uint32_t> center;
      for (const auto& [a, b] : boundary) {
        const std::uint32_t root = find(a);
        auto it = center.find(root);
        if (it == center.end()) {
          const auto& s = sums.at(root);
          it = center.emplace(root, static_cast<std::uint32_t>(out.vertices.size())).first;
          out.vertices.push_back(s.first / static_cast<double>(s.second));
        }
        out.faces.push_back({it->second, b, a});
      }
    }
  }

  // Drop vertices no face references (removed-side and on-plane leftovers).
  std::vector<std::uint32_t> used(out.vertices.size(), std::numeric_limits<std::uint32_t>::max());
  TriangleMesh compact;
  for (auto& f : out.faces) {
    for (auto& v : f) {
      if (used[v] == std::numeric_limits<std::uint32_t>::max()) {
        used[v] = static_cast<std::uint32_t>(compact.vertices.size());
        compact.vertices.push_back(out.vertices[v]);
      }
      v = used[v];
    }
  }
  compact.faces = std::move(out.faces);
  return compact;
}

NegativeVolume negative_volume(const TriangleMesh& inflated, const BinaryMask& mc_mask,
                               const BinaryMask& tb_mask, const std::optional<ClipPlane>& plane) {
  require_same_geometry(mc_mask.geometry(), tb_mask.geometry(), "negative_volume");
  const TriangleMesh solid = plane ? clip(inflated, *plane, true) : inflated;
  const BinaryMask occupied = voxelize(solid, mc_mask.geometry());
  NegativeVolume nv;
  nv.mask = largest_component(mask_andnot(mask_andnot(occupied, mc_mask), tb_mask));
  if (count(nv.mask) == 0) {
    fail(ErrorKind::Degenerate, "negative_volume: degenerate joint, inflated surface adds no voxels");
  }
  nv.mesh = extract_surface(nv.mask);
  return nv;
}

ClipPlane auto_neck_plane(const BinaryMask& mc_mask) {
  const auto& g = mc_mask.geometry();
  std::vector<std::size_t> area(g.nz(), 0);
  std::vector<Vec3> sum(g.nz(), Vec3::Zero());
  for (std::size_t k = 0; k < g.nz(); ++k) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        if (!mc_mask(i, j, k)) continue;
        ++area[k];
        sum[k] += g.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
      }
    }
  }
  std::size_t lo = g.nz(), hi = 0;
  for (std::size_t k = 0; k < g.nz(); ++k) {
    if (area[k] == 0) continue;
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  if (lo == g.nz() || hi - lo < 2) fail(ErrorKind::Degenerate, "auto_neck_plane: condyle mask too thin");

  // Walk down from the top: past the head (area falls below 80% of the
  // running maximum), follow the descent to its minimum until the profile
  // widens again by 20%, and cut at the highest slice within 5% of that
  // minimum.
  const auto at = [&](long z) { return static_cast<double>(area[static_cast<std::size_t>(z)]); };
  const long top = static_cast<long>(hi), bottom = static_cast<long>(lo);
  long peak = top, z = top;
  for (; z >= bottom; --z) {
    if (at(z) > at(peak)) peak = z;
    if (at(z) < 0.8 * at(peak)) break;
  }
  if (z < bottom) fail(ErrorKind::Degenerate, "auto_neck_plane: no neck below the condylar head");
  long narrowest = z;
  for (; z >= bottom; --z) {
    if (at(z) < at(narrowest)) narrowest = z;
    if (at(z) > 1.2 * at(narrowest)) break;
  }
  long cut = narrowest;
  for (long c = peak; c > narrowest; --c) {
    if (at(c) <= 1.05 * at(narrowest)) {
      cut = c;
      break;
    }
  }
  if (at(cut) == 0.0) fail(ErrorKind::Degenerate, "auto_neck_plane: condyle mask is split along z");
  ClipPlane plane;
  plane.point = sum[static_cast<std::size_t>(cut)] / at(cut);
  plane.normal = -Vec3::UnitZ();
  return plane;
}

}  // namespace negvol
