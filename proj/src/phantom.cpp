#include "negvol/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "negvol/error.hpp"

namespace negvol {

namespace {

GridGeometry phantom_geometry(const PhantomSpec& spec) {
  GridGeometry g;
  g.dims = spec.dims;
  g.spacing = Vec3::Constant(spec.spacing_mm);
  // World origin at the grid center.
  for (int a = 0; a < 3; ++a) g.origin[a] = -0.5 * static_cast<double>(spec.dims[a] - 1) * spec.spacing_mm;
  return g;
}

struct JointShape {
  Vec3 index_center;  // continuous voxel index
  Vec3 center;
  double r;       // condyle
  double R;       // fossa
  double shell;   // fossa wall thickness
  double neck;    // neck length, 0 for none
  bool socket;    // dome only, open below
};

// Dome walls reach this far below the condyle center, so the equator is
// covered and the neck is free.
double dome_depth(const JointShape& s) { return 0.5 * s.R; }

// `d` is the offset from the joint center.
bool in_condyle(const JointShape& s, const Vec3& d) {
  if (d.norm() <= s.r) return true;
  if (s.neck <= 0.0) return false;
  return d.z() <= 0.0 && d.z() >= -s.neck && std::hypot(d.x(), d.y()) <= 0.5 * s.r;
}

bool in_fossa_wall(const JointShape& s, const Vec3& d) {
  const double dist = d.norm();
  if (dist < s.R || dist > s.R + s.shell) return false;
  return !s.socket || d.z() >= -dome_depth(s);
}

JointPhantom rasterize(const JointShape& s, const GridGeometry& g) {
  JointPhantom j;
  j.mc = BinaryMask(g);
  j.tb = BinaryMask(g);
  j.center = s.center;
  j.condyle_radius_mm = s.r;
  j.fossa_radius_mm = s.R;
  for (std::size_t k = 0; k < g.nz(); ++k) {
    for (std::size_t jj = 0; jj < g.ny(); ++jj) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        // Offsets from integer index differences keep mirrored joints exact.
        const Vec3 d = (Vec3(static_cast<double>(i), static_cast<double>(jj), static_cast<double>(k)) -
                        s.index_center)
                           .cwiseProduct(g.spacing);
        if (in_condyle(s, d)) {
          j.mc(i, jj, k) = 1;
        } else if (in_fossa_wall(s, d)) {
          j.tb(i, jj, k) = 1;
        }
      }
    }
  }
  if (s.socket) j.clip = ClipPlane{s.center, -Vec3::UnitZ()};
  return j;
}

void require_inside(const GridGeometry& g, const Vec3& lo, const Vec3& hi) {
  const Vec3 glo = g.world(0, 0, 0);
  const Vec3 ghi = g.world(static_cast<double>(g.nx() - 1), static_cast<double>(g.ny() - 1),
                           static_cast<double>(g.nz() - 1));
  for (int a = 0; a < 3; ++a) {
    if (lo[a] < glo[a] || hi[a] > ghi[a]) {
      fail(ErrorKind::Config, "phantom spec: joint does not fit within the grid extent");
    }
  }
}

}  // namespace

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "concentric_spheres") return PhantomKind::ConcentricSpheres;
  if (s == "ball_and_socket") return PhantomKind::BallAndSocket;
  if (s == "asymmetric_pair") return PhantomKind::AsymmetricPair;
  fail(ErrorKind::Config, "unknown phantom kind '" + s + "'");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::ConcentricSpheres: return "concentric_spheres";
    case PhantomKind::BallAndSocket: return "ball_and_socket";
    case PhantomKind::AsymmetricPair: return "asymmetric_pair";
  }
  return "unknown";
}

void PhantomSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "phantom spec: " + what); };
  if (!(condyle_radius_mm > 0.0)) bad("condyle_radius_mm must be > 0");
  if (!(condyle_radius_mm < fossa_radius_mm)) bad("condyle_radius_mm must be < fossa_radius_mm");
  if (!(shell_thickness_mm > 0.0)) bad("shell_thickness_mm must be > 0");
  if (!(neck_length_mm >= 0.0)) bad("neck_length_mm must be >= 0");
  if (!(spacing_mm > 0.0)) bad("spacing_mm must be > 0");
  if (!(noise_sigma >= 0.0)) bad("noise_sigma must be >= 0");
  if (!(asymmetry_scale > 0.0)) bad("asymmetry_scale must be > 0");
  for (auto d : dims) {
    if (d < 2) bad("dims must be >= 2");
  }
}

double spherical_cap_volume(double r, double h) {
  if (h >= r) return 0.0;
  if (h <= -r) return 4.0 / 3.0 * std::numbers::pi * r * r * r;
  return std::numbers::pi * (r - h) * (r - h) * (2.0 * r + h) / 3.0;
}

double JointPhantom::truth_nv_volume_mm3(double clearance_mm) const {
  const double R = fossa_radius_mm - clearance_mm;
  const double r = condyle_radius_mm;
  if (R <= r) return 0.0;
  if (!clip) return 4.0 / 3.0 * std::numbers::pi * (R * R * R - r * r * r);
  // The kept side is opposite the clip normal; h is the plane's height
  // above the center measured along -normal.
  const double h = clip->signed_distance(center);
  return spherical_cap_volume(R, h) - spherical_cap_volume(r, h);
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const GridGeometry g = phantom_geometry(spec);
  Phantom ph;
  ph.intensity = VoxelGrid(g);

  const bool socket = spec.kind != PhantomKind::ConcentricSpheres;
  const double neck = socket ? spec.neck_length_mm : 0.0;
  auto fits = [&](const JointShape& s) {
    const double outer = s.R + s.shell;
    Vec3 lo = s.center - Vec3::Constant(outer);
    const Vec3 hi = s.center + Vec3::Constant(outer);
    if (s.socket) lo.z() = s.center.z() - std::max(dome_depth(s), s.neck);
    require_inside(g, lo, hi);
  };

  if (spec.kind == PhantomKind::AsymmetricPair) {
    // Centers at mirrored voxel indices so the sides reflect exactly.
    const double scale = spec.asymmetry_scale;
    const double reach = std::max(1.0, scale) * (spec.fossa_radius_mm + spec.shell_thickness_mm);
    const double half_span = 0.5 * static_cast<double>(g.nx() - 1);
    const double offset_vox = std::round((reach + spec.spacing_mm) / spec.spacing_mm);
    const double i_left = half_span - offset_vox;
    if (i_left < 0.0) fail(ErrorKind::Config, "phantom spec: grid too narrow for a joint pair");
    const double i_right = static_cast<double>(g.nx() - 1) - i_left;
    const double jc = 0.5 * static_cast<double>(g.ny() - 1);
    const double kc = 0.5 * static_cast<double>(g.nz() - 1);
    const JointShape left{Vec3(i_left, jc, kc), g.world(i_left, jc, kc), spec.condyle_radius_mm, spec.fossa_radius_mm,
                          spec.shell_thickness_mm, neck, true};
    const JointShape right{Vec3(i_right, jc, kc), g.world(i_right, jc, kc), scale * spec.condyle_radius_mm,
                           scale * spec.fossa_radius_mm, scale * spec.shell_thickness_mm,
                           scale * neck, true};
    fits(left);
    fits(right);
    ph.joints.push_back(rasterize(left, g));
    ph.joints.push_back(rasterize(right, g));
    ph.sagittal_x_mm = g.world(half_span, 0, 0).x();
  } else {
    const Vec3 ic(0.5 * static_cast<double>(g.nx() - 1), 0.5 * static_cast<double>(g.ny() - 1),
                  0.5 * static_cast<double>(g.nz() - 1));
    const JointShape s{ic, g.world(ic.x(), ic.y(), ic.z()), spec.condyle_radius_mm, spec.fossa_radius_mm, spec.shell_thickness_mm, neck, socket};
    fits(s);
    ph.joints.push_back(rasterize(s, g));
    ph.sagittal_x_mm = s.center.x();
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
  for (std::size_t n = 0; n < ph.intensity.size(); ++n) {
    bool bone = false;
    for (const auto& j : ph.joints) bone = bone || j.mc[n] || j.tb[n];
    float v = bone ? kPhantomBone : kPhantomBackground;
    if (spec.noise_sigma > 0.0) v += static_cast<float>(noise(rng));
    ph.intensity[n] = v;
  }
  return ph;
}

}  // namespace negvol
