#pragma once

#include "negvol/grid.hpp"

namespace negvol {

/// Separable Gaussian blur, sigma in mm converted per axis by spacing.
/// Kernel truncated at 3 sigma; borders clamp.
VoxelGrid gaussian_smooth(const VoxelGrid& g, double sigma_mm);

/// 3D Canny edges: Gaussian smoothing, central-difference gradient,
/// non-maximum suppression along the gradient direction quantized to the
/// 26 neighbor directions, and hysteresis with 26-connected linking.
/// `low` and `high` are fractions of the maximum gradient magnitude.
BinaryMask canny3d(const VoxelGrid& g, double sigma_mm, double low, double high);

/// Median over a (2r+1)^2 window within each axial (z) slice; borders clamp.
VoxelGrid median_filter_slices(const VoxelGrid& g, int radius);

}  // namespace negvol
