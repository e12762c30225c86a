#pragma once

#include <filesystem>

#include "negvol/mesh.hpp"

namespace negvol {

enum class StlFormat { Binary, Ascii };

/// Reads binary or ASCII STL (detected from content). Vertices with
/// bit-identical coordinates are welded so closed solids come back closed.
TriangleMesh read_stl(const std::filesystem::path& path);

void write_stl(const TriangleMesh& mesh, const std::filesystem::path& path,
               StlFormat format = StlFormat::Binary);

/// Vertices and faces only.
void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace negvol
