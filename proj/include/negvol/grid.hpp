#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "negvol/error.hpp"

namespace negvol {

using Vec3 = Eigen::Vector3d;
using Dims = std::array<std::size_t, 3>;

/// Physical layout shared by every dense grid. `origin` is the world position
/// (mm) of the center of voxel (0,0,0); voxel (i,j,k) sits at
/// origin + (i*sx, j*sy, k*sz). Storage is x-fastest.
struct GridGeometry {
  Dims dims{0, 0, 0};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t nx() const { return dims[0]; }
  std::size_t ny() const { return dims[1]; }
  std::size_t nz() const { return dims[2]; }
  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims[0] * (j + dims[1] * k);
  }

  bool contains(long i, long j, long k) const {
    return i >= 0 && j >= 0 && k >= 0 && static_cast<std::size_t>(i) < dims[0] &&
           static_cast<std::size_t>(j) < dims[1] && static_cast<std::size_t>(k) < dims[2];
  }

  Vec3 world(double i, double j, double k) const {
    return origin + Vec3(i * spacing.x(), j * spacing.y(), k * spacing.z());
  }

  /// Continuous voxel coordinates of a world point.
  Vec3 to_index(const Vec3& p) const { return (p - origin).cwiseQuotient(spacing); }

  double voxel_volume() const { return spacing.x() * spacing.y() * spacing.z(); }
  double voxel_diagonal() const { return spacing.norm(); }

  /// Throws Config on zero dims or non-positive / non-finite spacing.
  void validate() const;

  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.dims == b.dims && a.spacing == b.spacing && a.origin == b.origin;
  }
};

template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  explicit Grid(const GridGeometry& geometry, T fill = T{}) : geometry_(geometry) {
    geometry_.validate();
    values_.assign(geometry_.size(), fill);
  }

  Grid(const GridGeometry& geometry, std::vector<T> values)
      : geometry_(geometry), values_(std::move(values)) {
    geometry_.validate();
    if (values_.size() != geometry_.size()) {
      fail(ErrorKind::Io, "grid value count does not match dims");
    }
  }

  const GridGeometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }
  std::size_t nx() const { return geometry_.dims[0]; }
  std::size_t ny() const { return geometry_.dims[1]; }
  std::size_t nz() const { return geometry_.dims[2]; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator[](std::size_t n) { return values_[n]; }
  const T& operator[](std::size_t n) const { return values_[n]; }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return values_[geometry_.index(i, j, k)];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[geometry_.index(i, j, k)];
  }

  /// Value at (i,j,k), or `outside` when the index falls off the grid.
  T get_or(long i, long j, long k, T outside) const {
    return geometry_.contains(i, j, k) ? (*this)(i, j, k) : outside;
  }

  /// Value at the index clamped into the grid.
  T get_clamped(long i, long j, long k) const {
    auto clampi = [](long v, std::size_t n) {
      return static_cast<std::size_t>(v < 0 ? 0 : (v >= static_cast<long>(n) ? n - 1 : v));
    };
    return (*this)(clampi(i, nx()), clampi(j, ny()), clampi(k, nz()));
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.geometry_ == b.geometry_ && a.values_ == b.values_;
  }

 private:
  GridGeometry geometry_;
  std::vector<T> values_;
};

/// Dense scalar field: intensities, probabilities, distances.
using VoxelGrid = Grid<float>;
/// Dense occupancy field; nonzero means true.
using BinaryMask = Grid<std::uint8_t>;

std::size_t count(const BinaryMask& m);
double volume_mm3(const BinaryMask& m);

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what);

BinaryMask complement(const BinaryMask& m);
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
/// a AND NOT b
BinaryMask mask_andnot(const BinaryMask& a, const BinaryMask& b);
/// true where m is a subset of `of` (voxelwise implication).
bool is_subset(const BinaryMask& m, const BinaryMask& of);

/// Maps values affinely onto [0,1]; a constant grid maps to all zeros.
/// Non-finite input is rejected.
VoxelGrid normalize_minmax(const VoxelGrid& g);

/// Histogram threshold by the minimum method: the histogram over [0,1] is
/// smoothed with a 3-tap mean until exactly two local maxima remain, and the
/// threshold is the center of the lowest bin between them.
double minimum_method_threshold(std::span<const float> values, std::size_t bins);

/// values > minimum_method_threshold(g)
BinaryMask threshold_minimum(const VoxelGrid& g, std::size_t bins = 256);

/// values > threshold
BinaryMask threshold_above(const VoxelGrid& g, double threshold);

enum class ResampleMethod { Trilinear, BicubicSlices, Nearest };

/// Resamples to new_dims keeping the physical extent: new spacing is
/// spacing * dims / new_dims and voxel centers are laid out inside the same box.
VoxelGrid resample(const VoxelGrid& g, const Dims& new_dims, ResampleMethod method);

}  // namespace negvol
