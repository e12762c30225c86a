#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "negvol/grid.hpp"
#include "negvol/inflate.hpp"

namespace negvol {

enum class PhantomKind { ConcentricSpheres, BallAndSocket, AsymmetricPair };

PhantomKind phantom_kind_from_string(const std::string& s);
std::string to_string(PhantomKind kind);

struct PhantomSpec {
  PhantomKind kind = PhantomKind::ConcentricSpheres;
  double condyle_radius_mm = 5.0;
  double fossa_radius_mm = 12.0;
  /// Length of the cylindrical neck below the condyle center (socket kinds).
  double neck_length_mm = 10.0;
  double shell_thickness_mm = 3.0;
  std::array<std::size_t, 3> dims{80, 80, 80};
  double spacing_mm = 0.4;
  /// Noise standard deviation as a fraction of the unit intensity range.
  double noise_sigma = 0.0;
  /// Right-joint scale for asymmetric_pair.
  double asymmetry_scale = 1.0;
  std::uint64_t seed = 0;

  /// Throws Config for inconsistent radii or non-positive sizes. Whether the
  /// joints fit the grid is checked by generate_phantom.
  void validate() const;
};

/// One synthetic joint: condyle (mc) and confining bone (tb) masks on the
/// phantom grid.
struct JointPhantom {
  BinaryMask mc;
  BinaryMask tb;
  Vec3 center = Vec3::Zero();
  double condyle_radius_mm = 0.0;
  double fossa_radius_mm = 0.0;
  std::optional<ClipPlane> clip;

  /// Analytic volume of the cavity between condyle and fossa (above the
  /// clip plane when there is one). A positive clearance shrinks the fossa
  /// radius by that amount, matching where inflation stops.
  double truth_nv_volume_mm3(double clearance_mm = 0.0) const;
};

struct Phantom {
  VoxelGrid intensity;
  /// One joint, or left (lower x) then right for asymmetric_pair.
  std::vector<JointPhantom> joints;
  /// Mirror plane between the joints; the grid center otherwise.
  double sagittal_x_mm = 0.0;
};

/// Volume of the part of a ball of radius r whose height above its center
/// is at least h.
double spherical_cap_volume(double r, double h);

/// Deterministic for a given spec. Intensity is 0.2 for background and 0.8
/// for bone, plus Gaussian noise.
Phantom generate_phantom(const PhantomSpec& spec);

inline constexpr float kPhantomBackground = 0.2f;
inline constexpr float kPhantomBone = 0.8f;

}  // namespace negvol
