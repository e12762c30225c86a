#include "negvol/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace negvol {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "raw-grid I/O assumes a little-endian host");

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  return p.replace_extension(".json");
}

fs::path raw_path(const fs::path& path) {
  fs::path p = path;
  return p.replace_extension(".raw");
}

namespace {

void write_sidecar(const fs::path& path, const GridGeometry& geo, RawDtype dtype) {
  json j;
  j["dims"] = {geo.dims[0], geo.dims[1], geo.dims[2]};
  j["spacing_mm"] = {geo.spacing.x(), geo.spacing.y(), geo.spacing.z()};
  j["origin_mm"] = {geo.origin.x(), geo.origin.y(), geo.origin.z()};
  j["dtype"] = dtype == RawDtype::U8 ? "u8" : "f32";
  j["byte_order"] = "little";
  std::ofstream out(sidecar_path(path));
  if (!out) fail(ErrorKind::Io, "cannot write " + sidecar_path(path).string());
  out << j.dump(2) << '\n';
}

struct Sidecar {
  GridGeometry geometry;
  RawDtype dtype;
};

Sidecar read_sidecar(const fs::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) fail(ErrorKind::Io, "cannot read " + sidecar_path(path).string());
  Sidecar sc{};
  try {
    const json j = json::parse(in);
    for (int a = 0; a < 3; ++a) {
      sc.geometry.dims[a] = j.at("dims").at(a).get<std::size_t>();
      sc.geometry.spacing[a] = j.at("spacing_mm").at(a).get<double>();
      sc.geometry.origin[a] = j.at("origin_mm").at(a).get<double>();
    }
    const auto dtype = j.at("dtype").get<std::string>();
    if (dtype == "u8") {
      sc.dtype = RawDtype::U8;
    } else if (dtype == "f32") {
      sc.dtype = RawDtype::F32;
    } else {
      fail(ErrorKind::Io, "unsupported dtype '" + dtype + "'");
    }
    if (j.value("byte_order", std::string("little")) != "little") {
      fail(ErrorKind::Io, "only little-endian raw grids are supported");
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "malformed grid sidecar " + sidecar_path(path).string() + ": " + e.what());
  }
  try {
    sc.geometry.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Io, std::string("invalid grid sidecar: ") + e.what());
  }
  return sc;
}

template <typename T>
void write_raw(const fs::path& path, std::span<const T> values) {
  std::ofstream out(raw_path(path), std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + raw_path(path).string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
  if (!out) fail(ErrorKind::Io, "short write to " + raw_path(path).string());
}

template <typename T>
std::vector<T> read_raw(const fs::path& path, std::size_t n) {
  const fs::path rp = raw_path(path);
  std::error_code ec;
  const auto bytes = fs::file_size(rp, ec);
  if (ec) fail(ErrorKind::Io, "cannot read " + rp.string());
  if (bytes != n * sizeof(T)) {
    fail(ErrorKind::Io, rp.string() + ": expected " + std::to_string(n * sizeof(T)) +
                            " bytes, found " + std::to_string(bytes));
  }
  std::vector<T> v(n);
  std::ifstream in(rp, std::ios::binary);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) fail(ErrorKind::Io, "short read from " + rp.string());
  return v;
}

}  // namespace

void write_grid(const fs::path& path, const VoxelGrid& g) {
  write_sidecar(path, g.geometry(), RawDtype::F32);
  write_raw<float>(path, g.values());
}

void write_mask(const fs::path& path, const BinaryMask& m) {
  write_sidecar(path, m.geometry(), RawDtype::U8);
  write_raw<std::uint8_t>(path, m.values());
}

GridGeometry read_geometry(const fs::path& path) { return read_sidecar(path).geometry; }

VoxelGrid read_grid(const fs::path& path) {
  const Sidecar sc = read_sidecar(path);
  const std::size_t n = sc.geometry.size();
  if (sc.dtype == RawDtype::F32) return VoxelGrid(sc.geometry, read_raw<float>(path, n));
  const auto bytes = read_raw<std::uint8_t>(path, n);
  return VoxelGrid(sc.geometry, std::vector<float>(bytes.begin(), bytes.end()));
}

BinaryMask read_mask(const fs::path& path) {
  const Sidecar sc = read_sidecar(path);
  const std::size_t n = sc.geometry.size();
  if (sc.dtype == RawDtype::U8) return BinaryMask(sc.geometry, read_raw<std::uint8_t>(path, n));
  const auto values = read_raw<float>(path, n);
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = values[i] > 0.5f ? 1 : 0;
  return BinaryMask(sc.geometry, std::move(bits));
}

}  // namespace negvol
