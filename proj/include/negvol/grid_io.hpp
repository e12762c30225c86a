#pragma once

#include <filesystem>
#include <string>

#include "negvol/grid.hpp"

namespace negvol {

/// Raw-grid format: `<stem>.json` sidecar
///   {"dims":[nx,ny,nz], "spacing_mm":[..], "origin_mm":[..],
///    "dtype":"u8"|"f32", "byte_order":"little"}
/// next to `<stem>.raw` holding exactly nx*ny*nz little-endian elements,
/// x fastest. Either path (.json, .raw, or bare stem) may be passed.
enum class RawDtype { U8, F32 };

void write_grid(const std::filesystem::path& path, const VoxelGrid& g);
void write_mask(const std::filesystem::path& path, const BinaryMask& m);

VoxelGrid read_grid(const std::filesystem::path& path);
/// u8 files load verbatim (nonzero = true); f32 files threshold at > 0.5.
BinaryMask read_mask(const std::filesystem::path& path);

/// Geometry only, from the sidecar.
GridGeometry read_geometry(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);
std::filesystem::path raw_path(const std::filesystem::path& path);

}  // namespace negvol
