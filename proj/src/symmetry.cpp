#include "negvol/symmetry.hpp"

#include <algorithm>
#include <cmath>

#include "negvol/kdtree.hpp"
#include "negvol/parallel.hpp"

namespace negvol {

namespace {

// Nearest-neighbor distance from every point of `from` into `to`.
std::vector<double> directed_distances(const PointCloud& from, const KdTree& to) {
  std::vector<double> d(from.points.size());
  parallel_for(0, d.size(), [&](std::size_t i) { d[i] = std::sqrt(to.nearest(from.points[i]).second); });
  return d;
}

void require_points(const PointCloud& a, const PointCloud& b, const char* what) {
  if (a.points.empty() || b.points.empty()) {
    fail(ErrorKind::Geometry, std::string(what) + ": empty point cloud");
  }
}

}  // namespace

double hausdorff(const PointCloud& a, const PointCloud& b) {
  require_points(a, b, "hausdorff");
  const KdTree ta(a.points), tb(b.points);
  const auto dab = directed_distances(a, tb);
  const auto dba = directed_distances(b, ta);
  return std::max(*std::max_element(dab.begin(), dab.end()), *std::max_element(dba.begin(), dba.end()));
}

DistanceStats mean_surface_distance(const PointCloud& a, const PointCloud& b) {
  require_points(a, b, "mean_surface_distance");
  const KdTree ta(a.points), tb(b.points);
  auto d = directed_distances(a, tb);
  const auto dba = directed_distances(b, ta);
  d.insert(d.end(), dba.begin(), dba.end());
  double sum = 0.0;
  for (double v : d) sum += v;
  const double mean = sum / static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(d.size()))};
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a.geometry(), b.geometry(), "dice");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    na += a[n] != 0;
    nb += b[n] != 0;
    both += a[n] && b[n];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double cross_entropy(const VoxelGrid& p, const BinaryMask& t) {
  require_same_geometry(p.geometry(), t.geometry(), "cross_entropy");
  if (p.size() == 0) fail(ErrorKind::Geometry, "cross_entropy: empty grid");
  constexpr double eps = 1e-7;
  double sum = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double v = p[n];
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Io, "cross_entropy: probability outside [0, 1]");
    const double q = std::clamp(v, eps, 1.0 - eps);
    sum -= t[n] ? std::log(q) : std::log1p(-q);
  }
  return sum / static_cast<double>(p.size());
}

nlohmann::json SymmetryReport::to_json() const {
  nlohmann::json j;
  j["S_L_mm2"] = S_L_mm2;
  j["S_R_mm2"] = S_R_mm2;
  j["Vol_L_mm3"] = Vol_L_mm3;
  j["Vol_R_mm3"] = Vol_R_mm3;
  j["S_LR"] = S_LR;
  j["H_LR_mm"] = H_LR_mm;
  j["msd_mean_mm"] = msd_mean_mm;
  j["msd_std_mm"] = msd_std_mm;
  j["mirror_plane_x_mm"] = mirror_plane_x_mm;
  j["mirror_translation_mm"] = {translation_mm.x(), translation_mm.y(), translation_mm.z()};
  j["samples"] = samples;
  j["seed"] = seed;
  j["sampling_gap_mm"] = sampling_gap_mm;
  if (convergence_rel_change >= 0.0) j["H_LR_doubling_rel_change"] = convergence_rel_change;
  return j;
}

SymmetryReport compare_sides(const TriangleMesh& left, const TriangleMesh& right, double sagittal_x_mm,
                             const SymmetryOptions& options) {
  if (options.samples == 0) fail(ErrorKind::Config, "compare_sides: samples must be > 0");
  for (const auto* m : {&left, &right}) {
    validate(*m);
    if (!is_closed(*m)) fail(ErrorKind::Geometry, "compare_sides: surface is not closed");
  }
  SymmetryReport r;
  r.Vol_L_mm3 = enclosed_volume(left);
  r.Vol_R_mm3 = enclosed_volume(right);
  if (!(r.Vol_L_mm3 > 0.0)) fail(ErrorKind::Geometry, "compare_sides: left volume is not positive");
  if (!(r.Vol_R_mm3 > 0.0)) fail(ErrorKind::Geometry, "compare_sides: right volume is not positive");
  r.S_L_mm2 = surface_area(left);
  r.S_R_mm2 = surface_area(right);
  r.S_LR = std::max(r.S_L_mm2, r.S_R_mm2) / std::min(r.S_L_mm2, r.S_R_mm2);
  r.mirror_plane_x_mm = sagittal_x_mm;
  r.samples = options.samples;
  r.seed = options.seed;

  const TriangleMesh mirrored = mirrored_x(right, sagittal_x_mm);
  r.translation_mm = surface_centroid(left) - surface_centroid(mirrored);
  const TriangleMesh aligned = translated(mirrored, r.translation_mm);

  const PointCloud cl = sample_points(left, options.samples, options.seed);
  const PointCloud cr = sample_points(aligned, options.samples, options.seed);
  r.H_LR_mm = hausdorff(cl, cr);
  const auto msd = mean_surface_distance(cl, cr);
  r.msd_mean_mm = msd.mean;
  r.msd_std_mm = msd.stddev;
  const auto n = static_cast<double>(options.samples);
  r.sampling_gap_mm = 0.5 * (std::sqrt(r.S_L_mm2 / n) + std::sqrt(r.S_R_mm2 / n));

  if (options.convergence_check) {
    const PointCloud cl2 = sample_points(left, 2 * options.samples, options.seed);
    const PointCloud cr2 = sample_points(aligned, 2 * options.samples, options.seed);
    const double h2 = hausdorff(cl2, cr2);
    r.convergence_rel_change = r.H_LR_mm > 0.0 ? std::abs(h2 - r.H_LR_mm) / r.H_LR_mm : 0.0;
  }
  return r;
}

}  // namespace negvol
