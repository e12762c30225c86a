#include "negvol/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <unordered_map>

namespace negvol {

namespace {

// Pairwise summation keeps the result independent of how a caller might
// split the work and tighter than a running sum.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

void validate(const TriangleMesh& mesh) {
  const auto nv = mesh.vertices.size();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (auto v : mesh.faces[f]) {
      if (v >= nv) fail(ErrorKind::Geometry, "face " + std::to_string(f) + " has an out-of-range index");
    }
    if (0.5 * face_normal_unnormalized(mesh, f).norm() < kDegenerateFaceArea) {
      fail(ErrorKind::Geometry, "face " + std::to_string(f) + " is degenerate");
    }
  }
  for (const auto& p : mesh.vertices) {
    if (!p.allFinite()) fail(ErrorKind::Geometry, "mesh has a non-finite vertex");
  }
}

bool is_closed(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) return false;
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const auto a = f[e], b = f[(e + 1) % 3];
      ++count[edge_key(std::min(a, b), std::max(a, b))];
    }
  }
  return std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

bool is_consistently_oriented(const TriangleMesh& mesh) {
  if (!is_closed(mesh)) return false;
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      if (++directed[edge_key(f[e], f[(e + 1) % 3])] > 1) return false;
    }
  }
  for (const auto& [key, n] : directed) {
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
    if (!directed.count(edge_key(b, a))) return false;
  }
  return true;
}

Vec3 face_normal_unnormalized(const TriangleMesh& mesh, std::size_t f) {
  const auto& t = mesh.faces[f];
  const Vec3& a = mesh.vertices[t[0]];
  return (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
}

double surface_area(const TriangleMesh& mesh) {
  std::vector<double> areas(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    areas[f] = 0.5 * face_normal_unnormalized(mesh, f).norm();
  }
  return pairwise_sum(areas.data(), areas.size());
}

double enclosed_volume(const TriangleMesh& mesh) {
  if (!is_closed(mesh)) fail(ErrorKind::Geometry, "enclosed_volume: mesh is not closed");
  std::vector<double> vols(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    vols[f] = mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]])) / 6.0;
  }
  return pairwise_sum(vols.data(), vols.size());
}

Vec3 surface_centroid(const TriangleMesh& mesh) {
  Vec3 acc = Vec3::Zero();
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const double a = 0.5 * face_normal_unnormalized(mesh, f).norm();
    acc += a * (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    total += a;
  }
  if (!(total > 0.0)) fail(ErrorKind::Geometry, "surface_centroid: mesh has no area");
  return acc / total;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> n(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    // |cross| is twice the area, so the sum is area weighted.
    const Vec3 fn = face_normal_unnormalized(mesh, f);
    for (auto v : mesh.faces[f]) n[v] += fn;
  }
  for (std::size_t v = 0; v < n.size(); ++v) {
    const double len = n[v].norm();
    if (!(len > 0.0)) {
      fail(ErrorKind::Geometry, "vertex " + std::to_string(v) + " has no normal (isolated vertex)");
    }
    n[v] /= len;
  }
  return n;
}

std::vector<std::vector<std::uint32_t>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::vector<std::uint32_t>> nb(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      nb[f[e]].push_back(f[(e + 1) % 3]);
      nb[f[e]].push_back(f[(e + 2) % 3]);
    }
  }
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nb;
}

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, double lambda, int iterations,
                              std::span<const std::uint8_t> frozen) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorKind::Config, "laplacian_smooth: lambda must be in [0, 1]");
  }
  if (!frozen.empty() && frozen.size() != mesh.vertices.size()) {
    fail(ErrorKind::Config, "laplacian_smooth: frozen flags do not match vertex count");
  }
  TriangleMesh out = mesh;
  if (lambda == 0.0 || iterations <= 0) return out;
  const auto nb = vertex_neighbors(mesh);
  std::vector<Vec3> next(out.vertices.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
      next[v] = out.vertices[v];
      if ((!frozen.empty() && frozen[v]) || nb[v].empty()) continue;
      Vec3 c = Vec3::Zero();
      for (auto u : nb[v]) c += out.vertices[u];
      c /= static_cast<double>(nb[v].size());
      next[v] += lambda * (c - out.vertices[v]);
    }
    out.vertices.swap(next);
  }
  return out;
}

PointCloud sample_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::Config, "sample_points: n must be >= 1");
  if (mesh.faces.empty()) fail(ErrorKind::Geometry, "sample_points: mesh is empty");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += 0.5 * face_normal_unnormalized(mesh, f).norm();
    cumulative[f] = total;
  }
  if (!(total > 0.0)) fail(ErrorKind::Geometry, "sample_points: mesh has zero area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double pick = uni(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& t = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(uni(rng));
    const double r2 = uni(rng);
    cloud.points.push_back((1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                           r1 * r2 * mesh.vertices[t[2]]);
  }
  return cloud;
}

TriangleMesh flipped(const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  for (auto& f : out.faces) std::swap(f[1], f[2]);
  return out;
}

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset) {
  TriangleMesh out = mesh;
  for (auto& p : out.vertices) p += offset;
  return out;
}

TriangleMesh scaled(const TriangleMesh& mesh, double factor, const Vec3& center) {
  TriangleMesh out = mesh;
  for (auto& p : out.vertices) p = center + factor * (p - center);
  return out;
}

TriangleMesh mirrored_x(const TriangleMesh& mesh, double plane_x) {
  TriangleMesh out = flipped(mesh);
  for (auto& p : out.vertices) p.x() = 2.0 * plane_x - p.x();
  return out;
}

TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh out = a;
  const auto base = static_cast<std::uint32_t>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& f : b.faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  return out;
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const auto idx = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const auto ab = midpoint(f[0], f[1]);
      const auto bc = midpoint(f[1], f[2]);
      const auto ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    m.faces.swap(faces);
  }
  for (auto& v : m.vertices) v = center + radius * v;
  return m;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int c = 0; c < 8; ++c) {
    m.vertices.emplace_back((c & 1) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(),
                            (c & 4) ? hi.z() : lo.z());
  }
  m.faces = {{0, 2, 3}, {0, 3, 1},   // z = lo
             {4, 5, 7}, {4, 7, 6},   // z = hi
             {0, 1, 5}, {0, 5, 4},   // y = lo
             {2, 6, 7}, {2, 7, 3},   // y = hi
             {0, 4, 6}, {0, 6, 2},   // x = lo
             {1, 3, 7}, {1, 7, 5}};  // x = hi
  return m;
}

}  // namespace negvol
