#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "negvol/grid.hpp"
#include "negvol/mesh.hpp"

namespace testsupport {

using negvol::BinaryMask;
using negvol::GridGeometry;
using negvol::Vec3;

inline GridGeometry cube_geometry(std::size_t n, double spacing = 1.0, const Vec3& origin = Vec3::Zero()) {
  GridGeometry g;
  g.dims = {n, n, n};
  g.spacing = Vec3::Constant(spacing);
  g.origin = origin;
  return g;
}

inline BinaryMask random_mask(const GridGeometry& g, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  BinaryMask m(g);
  for (auto& v : m.values()) v = coin(rng) ? 1 : 0;
  return m;
}

/// Random union of a few balls, so masks have blob-like structure.
inline BinaryMask random_blobs(const GridGeometry& g, int blobs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  BinaryMask m(g);
  for (int b = 0; b < blobs; ++b) {
    const Vec3 c(pos(rng) * (g.nx() - 1), pos(rng) * (g.ny() - 1), pos(rng) * (g.nz() - 1));
    const double r = 1.0 + pos(rng) * 0.25 * static_cast<double>(g.nx());
    for (std::size_t k = 0; k < g.nz(); ++k) {
      for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
          if ((Vec3(i, j, k) - c).norm() <= r) m(i, j, k) = 1;
        }
      }
    }
  }
  return m;
}

inline BinaryMask ball_mask(const GridGeometry& g, const Vec3& center_mm, double radius_mm) {
  BinaryMask m(g);
  for (std::size_t k = 0; k < g.nz(); ++k) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const Vec3 p = g.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
        m(i, j, k) = (p - center_mm).norm() <= radius_mm ? 1 : 0;
      }
    }
  }
  return m;
}

/// Distance from p to the axis-aligned cube of voxel (i,j,k).
inline double box_distance(const GridGeometry& g, std::size_t i, std::size_t j, std::size_t k, const Vec3& p) {
  const Vec3 c = g.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
  const Vec3 d = ((p - c).cwiseAbs() - 0.5 * g.spacing).cwiseMax(0.0);
  return d.norm();
}

/// O(N^2) signed distance from each voxel center to the nearest voxel of the
/// opposite class. `cubes` measures to the voxel cube instead of its center.
inline negvol::VoxelGrid brute_force_distance(const BinaryMask& m, bool cubes) {
  const auto& g = m.geometry();
  std::vector<Vec3> centers[2];
  for (std::size_t k = 0; k < g.nz(); ++k)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i)
        centers[m(i, j, k) != 0].push_back(
            g.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)));
  const Vec3 half = 0.5 * g.spacing;
  negvol::VoxelGrid out(g, 0.0f);
  for (std::size_t k = 0; k < g.nz(); ++k) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const Vec3 p = g.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
        const bool inside = m(i, j, k) != 0;
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& c : centers[!inside]) {
          const Vec3 d = cubes ? Vec3(((p - c).cwiseAbs() - half).cwiseMax(0.0)) : Vec3(p - c);
          best = std::min(best, d.squaredNorm());
        }
        best = std::sqrt(best);
        out(i, j, k) = static_cast<float>(inside ? -best : best);
      }
    }
  }
  return out;
}

inline double brute_force_hausdorff(const negvol::PointCloud& a, const negvol::PointCloud& b) {
  auto directed = [](const negvol::PointCloud& x, const negvol::PointCloud& y) {
    double worst = 0.0;
    for (const Vec3& p : x.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : y.points) best = std::min(best, (p - q).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline negvol::PointCloud random_cloud(std::size_t n, std::uint64_t seed, double extent = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  negvol::PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
  return c;
}

/// Fresh per-test scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("negvol_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
