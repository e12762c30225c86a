#include "negvol/mesh_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "negvol/error.hpp"

namespace negvol {

namespace {

static_assert(std::endian::native == std::endian::little, "STL I/O assumes a little-endian host");

constexpr std::size_t kHeaderBytes = 80;
constexpr std::size_t kFacetBytes = 50;

struct Welder {
  TriangleMesh mesh;
  std::map<std::array<float, 3>, std::uint32_t> index;

  std::uint32_t add(const std::array<float, 3>& p) {
    auto [it, inserted] = index.emplace(p, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) mesh.vertices.emplace_back(p[0], p[1], p[2]);
    return it->second;
  }

  void add_facet(const std::array<std::array<float, 3>, 3>& tri, const std::string& where) {
    for (const auto& p : tri) {
      for (float c : p) {
        if (!std::isfinite(c)) fail(ErrorKind::Io, where + ": non-finite vertex coordinate");
      }
    }
    const Face f{add(tri[0]), add(tri[1]), add(tri[2])};
    // Facets that collapse after welding carry no area; drop them.
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return;
    mesh.faces.push_back(f);
  }
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_binary(const std::string& data) {
  if (data.size() < kHeaderBytes + 4) return false;
  std::uint32_t n = 0;
  std::memcpy(&n, data.data() + kHeaderBytes, 4);
  // Some exporters write "solid" into binary headers, so size decides.
  return data.size() == kHeaderBytes + 4 + static_cast<std::size_t>(n) * kFacetBytes;
}

TriangleMesh parse_binary(const std::string& data, const std::string& where) {
  std::uint32_t n = 0;
  std::memcpy(&n, data.data() + kHeaderBytes, 4);
  Welder w;
  for (std::uint32_t t = 0; t < n; ++t) {
    const char* rec = data.data() + kHeaderBytes + 4 + t * kFacetBytes;
    std::array<std::array<float, 3>, 3> tri{};
    std::memcpy(tri.data(), rec + 12, 36);
    w.add_facet(tri, where);
  }
  return std::move(w.mesh);
}

TriangleMesh parse_ascii(const std::string& data, const std::string& where) {
  std::istringstream in(data);
  std::string word;
  in >> word;
  if (word != "solid") fail(ErrorKind::Io, where + ": neither binary nor ASCII STL");
  Welder w;
  std::array<std::array<float, 3>, 3> tri{};
  int corner = 0;
  while (in >> word) {
    if (word == "vertex") {
      if (corner >= 3) fail(ErrorKind::Io, where + ": facet with more than 3 vertices");
      double x, y, z;
      if (!(in >> x >> y >> z)) fail(ErrorKind::Io, where + ": malformed vertex");
      tri[corner++] = {static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)};
    } else if (word == "endloop") {
      if (corner != 3) fail(ErrorKind::Io, where + ": facet without 3 vertices");
      w.add_facet(tri, where);
      corner = 0;
    }
  }
  if (corner != 0) fail(ErrorKind::Io, where + ": truncated facet");
  return std::move(w.mesh);
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

TriangleMesh read_stl(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  const std::string where = path.string();
  TriangleMesh mesh = looks_binary(data) ? parse_binary(data, where) : parse_ascii(data, where);
  if (mesh.faces.empty()) fail(ErrorKind::Io, where + ": no facets");
  return mesh;
}

void write_stl(const TriangleMesh& mesh, const std::filesystem::path& path, StlFormat format) {
  validate(mesh);
  if (format == StlFormat::Binary) {
    auto out = open_out(path, true);
    char header[kHeaderBytes] = {};
    std::strncpy(header, "negvol binary STL", kHeaderBytes);
    out.write(header, kHeaderBytes);
    const auto n = static_cast<std::uint32_t>(mesh.faces.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      float rec[12];
      const Vec3 nrm = face_normal_unnormalized(mesh, f).normalized();
      for (int a = 0; a < 3; ++a) rec[a] = static_cast<float>(nrm[a]);
      for (int c = 0; c < 3; ++c) {
        const Vec3& p = mesh.vertices[mesh.faces[f][c]];
        for (int a = 0; a < 3; ++a) rec[3 + 3 * c + a] = static_cast<float>(p[a]);
      }
      out.write(reinterpret_cast<const char*>(rec), sizeof rec);
      const std::uint16_t attr = 0;
      out.write(reinterpret_cast<const char*>(&attr), 2);
    }
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
    return;
  }
  auto out = open_out(path, false);
  out << std::setprecision(9);
  out << "solid negvol\n";
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 nrm = face_normal_unnormalized(mesh, f).normalized();
    out << "  facet normal " << nrm[0] << ' ' << nrm[1] << ' ' << nrm[2] << "\n    outer loop\n";
    for (int c = 0; c < 3; ++c) {
      const Vec3& p = mesh.vertices[mesh.faces[f][c]];
      out << "      vertex " << static_cast<float>(p[0]) << ' ' << static_cast<float>(p[1]) << ' '
          << static_cast<float>(p[2]) << '\n';
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid negvol\n";
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  auto out = open_out(path, false);
  out << std::setprecision(9);
  for (const auto& p : mesh.vertices) out << "v " << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace negvol
