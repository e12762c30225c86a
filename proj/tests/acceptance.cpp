// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "negvol/distance.hpp"
#include "negvol/filters.hpp"
#include "negvol/grid_io.hpp"
#include "negvol/inflate.hpp"
#include "negvol/marching_cubes.hpp"
#include "negvol/morphology.hpp"
#include "negvol/phantom.hpp"
#include "negvol/pipeline.hpp"
#include "negvol/symmetry.hpp"
#include "negvol/voxelize.hpp"
#include "support.hpp"

using namespace negvol;
using std::numbers::pi;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PipelineConfig phantom_config(const Phantom& p, const std::filesystem::path& dir) {
  write_grid(dir / "intensity", p.intensity);
  PipelineConfig cfg;
  cfg.intensity = dir / "intensity.json";
  cfg.output_dir = dir / "out";
  for (std::size_t n = 0; n < p.joints.size(); ++n) {
    SideInput s;
    s.clip_mode = p.joints[n].clip ? SideInput::ClipMode::Plane : SideInput::ClipMode::None;
    if (p.joints[n].clip) s.clip = *p.joints[n].clip;
    (n == 0 ? cfg.left : cfg.right) = s;
  }
  if (p.joints.size() == 2) cfg.metrics.sagittal_x_mm = p.sagittal_x_mm;
  return cfg;
}

void phantom_volumetry() {
  bool ok = true;
  std::string detail;
  for (double noise : {0.0, 0.05}) {
    PhantomSpec spec;  // concentric spheres, r 5, R 12, 0.4 mm
    spec.noise_sigma = noise;
    spec.seed = 1;
    const Phantom p = generate_phantom(spec);
    const auto cfg = phantom_config(p, testsupport::scratch_dir("acc1_" + std::to_string(noise)));
    const PipelineResult r = run_pipeline(cfg);
    const double truth = p.joints[0].truth_nv_volume_mm3(cfg.inflation.clearance_mm);
    const double vol = r.report["sides"]["left"]["nv_volume_mm3"].get<double>();
    double runtime = 0.0;
    for (const auto& t : r.timings) {
      if (t.stage == "inflate" || t.stage == "negative_volume") runtime += t.seconds;
    }
    const double err = vol / truth - 1.0;
    ok = ok && std::abs(err) <= 0.05 && runtime <= 30.0;
    detail += fmt("%snoise %.2f: NV %.1f mm3 vs corrected truth %.1f (%+.2f%%), inflate+boolean %.2f s",
                  detail.empty() ? "" : "; ", noise, vol, truth, 100 * err, runtime);
  }
  report(1, "phantom volumetry", ok, detail);
}

void symmetry_nulls() {
  auto run = [](double scale) {
    PhantomSpec spec;
    spec.kind = PhantomKind::AsymmetricPair;
    spec.dims = {180, 88, 88};
    spec.asymmetry_scale = scale;
    const Phantom p = generate_phantom(spec);
    return *run_pipeline(phantom_config(p, testsupport::scratch_dir("acc2_" + std::to_string(scale)))).symmetry;
  };
  const SymmetryReport same = run(1.0);
  const SymmetryReport big = run(1.08);
  const bool ok = same.S_LR <= 1.01 && same.H_LR_mm <= 3.0 * same.sampling_gap_mm && big.S_LR >= 1.12 &&
                  big.S_LR <= 1.22;
  report(2, "symmetry nulls", ok,
         fmt("scale 1.00: S_LR %.4f, H_LR %.3f mm (%.2fx gap %.3f mm); scale 1.08: S_LR %.4f (quadratic %.4f)",
             same.S_LR, same.H_LR_mm, same.H_LR_mm / same.sampling_gap_mm, same.sampling_gap_mm, big.S_LR,
             1.08 * 1.08));
}

void metric_oracles() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const PointCloud a = testsupport::random_cloud(200, 2 * s);
    const PointCloud b = testsupport::random_cloud(200, 2 * s + 1, 5.0 + 0.1 * s);
    worst = std::max(worst, std::abs(hausdorff(a, b) - testsupport::brute_force_hausdorff(a, b)));
  }
  const auto g = testsupport::cube_geometry(10);
  BinaryMask a(g), b(g), all(g, 1), half(g);
  for (std::size_t n = 0; n < 100; ++n) a[n] = 1;
  for (std::size_t n = 50; n < 150; ++n) b[n] = 1;
  for (std::size_t n = 0; n < half.size(); n += 2) half[n] = 1;
  const double d = dice(a, b);
  const double ce_half = cross_entropy(VoxelGrid(g, 0.5f), half);
  const double ce_09 = cross_entropy(VoxelGrid(g, 0.9f), all);
  const bool ok = worst <= 1e-9 && std::abs(d - 0.5) < 1e-12 && std::abs(ce_half - std::log(2.0)) < 1e-6 &&
                  std::abs(ce_09 + std::log(0.9)) < 1e-6;
  report(3, "metric oracles", ok,
         fmt("max |hausdorff - brute| %.1e over 100 pairs; dice %.4f (0.5); CE %.5f (ln2 %.5f), %.5f (-ln0.9 %.5f)",
             worst, d, ce_half, std::log(2.0), ce_09, -std::log(0.9)));
}

void geometry_oracles() {
  const auto g = testsupport::cube_geometry(48, 0.4);
  double min_dice = 1.0;
  for (double r : {3.0, 5.0, 7.5}) {
    const BinaryMask m = voxelize(make_icosphere(r, 4, g.world(23.3, 24.1, 23.7)), g);
    min_dice = std::min(min_dice, dice(m, voxelize(extract_surface(m), g)));
  }
  const double r = 7.5;
  const TriangleMesh s = make_icosphere(r, 5);
  const double area_err = surface_area(s) / (4 * pi * r * r) - 1.0;
  const double vol_err = enclosed_volume(s) / (4.0 / 3.0 * pi * r * r * r) - 1.0;
  ClipPlane plane;
  plane.normal = Vec3(1, 1, 0).normalized();
  const double hemi_err = enclosed_volume(clip(make_icosphere(r, 4), plane)) / (2.0 / 3.0 * pi * r * r * r) - 1.0;
  const bool ok = min_dice >= 0.95 && std::abs(area_err) <= 0.01 && std::abs(vol_err) <= 0.01 &&
                  std::abs(hemi_err) <= 0.02;
  report(4, "geometry oracles", ok,
         fmt("round-trip Dice min %.4f; icosphere area %+.3f%%, volume %+.3f%%; hemisphere volume %+.3f%%", min_dice,
             100 * area_err, 100 * vol_err, 100 * hemi_err));
}

void grid_oracles() {
  const auto g = testsupport::cube_geometry(16, 0.5);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const BinaryMask m = seed % 2 ? testsupport::random_mask(g, 0.02 + 0.009 * seed, seed)
                                  : testsupport::random_blobs(g, 2, seed);
    if (count(m) == 0 || count(m) == m.size()) continue;
    const VoxelGrid sdf = distance_field(m);
    const VoxelGrid brute = testsupport::brute_force_distance(m, true);
    for (std::size_t n = 0; n < m.size(); ++n) worst = std::max(worst, std::abs(double(sdf[n]) - brute[n]));
  }
  const bool edt_ok = worst <= 0.5 * g.voxel_diagonal();

  int morph_bad = 0;
  const auto mg = testsupport::cube_geometry(20);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    BinaryMask m = testsupport::random_blobs(mg, 3, seed);
    for (std::size_t k = 0; k < 20; ++k)
      for (std::size_t j = 0; j < 20; ++j)
        for (std::size_t i = 0; i < 20; ++i)
          if (i < 5 || j < 5 || k < 5 || i >= 15 || j >= 15 || k >= 15) m(i, j, k) = 0;
    const auto se = StructuringElement::ball(1 + seed % 2);
    // Outside the grid counts as false for both operators, so duality only
    // holds at least one radius in from the border.
    const BinaryMask dil = dilate(m, se), dual = complement(erode(complement(m), se));
    bool dual_ok = true;
    const std::size_t r = static_cast<std::size_t>(se.radius);
    for (std::size_t k = r; k < 20 - r; ++k)
      for (std::size_t j = r; j < 20 - r; ++j)
        for (std::size_t i = r; i < 20 - r; ++i) dual_ok = dual_ok && dil(i, j, k) == dual(i, j, k);
    const BinaryMask o = open(m, se), c = close(m, se);
    morph_bad += !(dual_ok && open(o, se) == o && close(c, se) == c && is_subset(o, m) && is_subset(m, c));
  }

  const auto cg = testsupport::cube_geometry(40, 0.5);
  const Vec3 center = cg.world(19.5, 19.5, 19.5);
  const BinaryMask ball = testsupport::ball_mask(cg, center, 6.3);
  std::mt19937_64 rng(11);
  std::normal_distribution<float> noise(0.0f, 0.03f);
  VoxelGrid img(cg);
  for (std::size_t n = 0; n < img.size(); ++n) img[n] = (ball[n] ? 0.8f : 0.2f) + noise(rng);
  const BinaryMask edges = canny3d(img, 0.6, 0.1, 0.2);
  std::size_t total = 0, near = 0;
  for (std::size_t k = 0; k < 40; ++k)
    for (std::size_t j = 0; j < 40; ++j)
      for (std::size_t i = 0; i < 40; ++i)
        if (edges(i, j, k)) {
          ++total;
          near += std::abs((cg.world(i, j, k) - center).norm() - 6.3) <= 1.5 * 0.5;
        }
  const double frac = total ? static_cast<double>(near) / total : 0.0;
  report(5, "grid oracles", edt_ok && morph_bad == 0 && frac >= 0.95,
         fmt("EDT max deviation %.3f mm (bound %.3f); morphology failures %d/100; canny %.1f%% of %zu edge voxels "
             "within 1.5 voxels",
             worst, 0.5 * g.voxel_diagonal(), morph_bad, 100 * frac, total));
}

void inflation_invariants() {
  std::vector<std::pair<std::string, PhantomSpec>> phantoms(3);
  phantoms[0].first = "concentric";
  phantoms[1].first = "ball_and_socket";
  phantoms[1].second.kind = PhantomKind::BallAndSocket;
  phantoms[2].first = "pair";
  phantoms[2].second.kind = PhantomKind::AsymmetricPair;
  phantoms[2].second.dims = {180, 88, 88};
  phantoms[2].second.asymmetry_scale = 1.08;
  bool ok = true;
  std::string detail;
  const InflationConfig cfg;
  for (const auto& [name, spec] : phantoms) {
    const Phantom p = generate_phantom(spec);
    for (std::size_t side = 0; side < p.joints.size(); ++side) {
      const auto& jp = p.joints[side];
      const TriangleMesh seed = extract_surface(jp.mc);
      const VoxelGrid sdf = distance_field(jp.tb);
      const InflationResult a = inflate(seed, sdf, cfg);
      const InflationResult b = inflate(seed, sdf, cfg);
      bool frozen_monotone = true;
      double worst_dip = 0.0, drift = 0.0, prev_volume = a.trace.initial_volume_mm3, best = prev_volume;
      std::size_t prev = a.trace.vertex_count;
      for (const auto& rec : a.trace.records) {
        frozen_monotone = frozen_monotone && rec.free_count <= prev;
        prev = rec.free_count;
        worst_dip = std::max(worst_dip, 1.0 - rec.volume_mm3 / prev_volume);
        prev_volume = rec.volume_mm3;
        best = std::max(best, rec.volume_mm3);
        drift = std::max(drift, 1.0 - rec.volume_mm3 / best);
      }
      std::size_t contained = 0;
      for (const Vec3& v : a.mesh.vertices) contained += sample_trilinear(sdf, v) >= cfg.clearance_mm;
      const bool identical = a.mesh.vertices == b.mesh.vertices && a.mesh.faces == b.mesh.faces;
      const bool side_ok =
          frozen_monotone && worst_dip <= 0.005 && contained == a.mesh.vertices.size() && identical;
      ok = ok && side_ok;
      detail += fmt("%s%s%s: %zu it, max step dip %.3f%% (below peak %.2f%%), contained %zu/%zu%s",
                    detail.empty() ? "" : "; ", name.c_str(), p.joints.size() == 2 ? (side == 0 ? "/L" : "/R") : "",
                    a.trace.records.size(), 100 * worst_dip, 100 * drift, contained, a.mesh.vertices.size(),
                    identical ? "" : ", rerun differs");
    }
  }
  report(6, "inflation invariants", ok, detail);
}

}  // namespace

int main() {
  auto guarded = [](int id, const char* name, void (*fn)()) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("threw: ") + e.what());
    }
  };
  guarded(1, "phantom volumetry", phantom_volumetry);
  guarded(2, "symmetry nulls", symmetry_nulls);
  guarded(3, "metric oracles", metric_oracles);
  guarded(4, "geometry oracles", geometry_oracles);
  guarded(5, "grid oracles", grid_oracles);
  guarded(6, "inflation invariants", inflation_invariants);
  std::printf(
      "[N/A ] 7 clinical results: not reproducible here. Neural segmentation scores, localization Dice and the "
      "patient-cohort correlation need the private scans and trained networks; criteria 1-6 stand in for them.\n");
  std::printf("%d of 6 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
