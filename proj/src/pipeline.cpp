#include "negvol/pipeline.hpp"

#include <chrono>
#include <utility>

#include "negvol/distance.hpp"
#include "negvol/filters.hpp"
#include "negvol/grid_io.hpp"
#include "negvol/marching_cubes.hpp"
#include "negvol/mesh_io.hpp"
#include "negvol/morphology.hpp"
#include "negvol/parallel.hpp"
#include "negvol/voxelize.hpp"

namespace negvol {

using nlohmann::json;

JointMasks segment_joint(const VoxelGrid& intensity, const EnhancementConfig& enhancement, const VoiConfig& voi) {
  const VoxelGrid denoised = enhancement.enabled && enhancement.median_radius > 0
                                 ? median_filter_slices(intensity, enhancement.median_radius)
                                 : intensity;
  const VoxelGrid normalized = normalize_minmax(denoised);
  const BinaryMask bone = voi.bone_threshold ? threshold_above(normalized, *voi.bone_threshold)
                                             : threshold_minimum(normalized, voi.histogram_bins);
  const ComponentLabels cc = label_components(bone);
  if (cc.component_count() < 2) {
    fail(ErrorKind::Degenerate, "segment: expected condyle and confining bone, found " +
                                    std::to_string(cc.component_count()) + " bone component(s)");
  }
  // Largest and second-largest labels, lowest label first on ties.
  std::uint32_t first = 0, second = 0;
  for (std::uint32_t l = 1; l < cc.sizes.size(); ++l) {
    if (first == 0 || cc.sizes[l] > cc.sizes[first]) {
      second = first;
      first = l;
    } else if (second == 0 || cc.sizes[l] > cc.sizes[second]) {
      second = l;
    }
  }
  JointMasks out{BinaryMask(bone.geometry()), BinaryMask(bone.geometry())};
  for (std::size_t n = 0; n < bone.size(); ++n) {
    out.tb[n] = cc.labels[n] == first;
    out.mc[n] = cc.labels[n] == second;
  }
  if (!enhancement.enabled) return out;

  auto refine = [&](const BinaryMask& m) {
    BinaryMask r = m;
    if (enhancement.close_radius > 0) r = close(r, StructuringElement::ball(enhancement.close_radius));
    if (enhancement.open_radius > 0) r = open(r, StructuringElement::ball(enhancement.open_radius));
    return count(r) > 0 ? r : m;
  };
  out.tb = refine(out.tb);
  out.mc = refine(out.mc);
  if (enhancement.canny) {
    const BinaryMask edges =
        canny3d(denoised, enhancement.canny_sigma_mm, enhancement.canny_low, enhancement.canny_high);
    const auto ball = StructuringElement::ball(1);
    const BinaryMask near_tb = mask_andnot(dilate(out.tb, ball), dilate(out.mc, ball));
    // Only edge voxels on the bright side of the edge (negative Laplacian of
    // the smoothed grid) join the bone, so the fused boundary does not grow
    // into the joint space.
    const VoxelGrid smooth = gaussian_smooth(denoised, enhancement.canny_sigma_mm);
    const auto& g = smooth.geometry();
    for (std::size_t k = 0; k < g.nz(); ++k) {
      for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
          const std::size_t n = g.index(i, j, k);
          if (!edges[n] || !near_tb[n] || out.tb[n]) continue;
          const long li = static_cast<long>(i), lj = static_cast<long>(j), lk = static_cast<long>(k);
          const double lap = smooth.get_clamped(li - 1, lj, lk) + smooth.get_clamped(li + 1, lj, lk) +
                             smooth.get_clamped(li, lj - 1, lk) + smooth.get_clamped(li, lj + 1, lk) +
                             smooth.get_clamped(li, lj, lk - 1) + smooth.get_clamped(li, lj, lk + 1) -
                             6.0 * smooth[n];
          if (lap < 0.0) out.tb[n] = 1;
        }
      }
    }
  }
  out.tb = mask_andnot(out.tb, out.mc);
  return out;
}

json PipelineResult::timing_json() const {
  json stages = json::array();
  double sum = 0.0;
  for (const auto& t : timings) {
    stages.push_back({{"stage", t.stage}, {"side", t.side}, {"seconds", t.seconds}});
    sum += t.seconds;
  }
  return {{"stages", stages}, {"stage_sum_s", sum}, {"total_s", total_seconds}, {"threads", thread_count()}};
}

namespace {

using Clock = std::chrono::steady_clock;

class Runner {
 public:
  Runner(const PipelineConfig& cfg, PipelineResult& result) : cfg_(cfg), result_(result) {}

  // Times `f` as one stage and tags any module error with the stage name.
  template <class F>
  auto stage(const char* name, const std::string& side, F&& f) {
    struct Record {
      PipelineResult& r;
      const char* name;
      const std::string& side;
      Clock::time_point t0 = Clock::now();
      ~Record() { r.timings.push_back({name, side, std::chrono::duration<double>(Clock::now() - t0).count()}); }
    } record{result_, name, side};
    try {
      return f();
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(e, name, side);
    }
  }

  void run();

 private:
  struct SideGrid {
    GridGeometry geometry;
    std::optional<BoundingBox> box;
    std::optional<VoxelGrid> intensity;
  };

  void locate();
  SideResult run_side(const std::string& name, const SideInput& input, const SideGrid& grid);
  JointMasks load_masks(const std::string& name, const SideInput& input, const SideGrid& grid,
                        std::optional<TriangleMesh>& seed);

  const PipelineConfig& cfg_;
  PipelineResult& result_;
  std::optional<VoxelGrid> intensity_;
  std::optional<BoundingBox> left_box_, right_box_;
  Vec3 box_scale_ = Vec3::Ones();
  std::optional<double> split_x_;
};

void Runner::locate() {
  const bool two = cfg_.left && cfg_.right;
  std::optional<VoxelGrid> probability;
  if (!cfg_.probability.empty()) probability = stage("load", "", [&] { return read_grid(cfg_.probability); });

  stage("voi", "", [&] {
    CoarseMaskOptions opt;
    opt.bone_threshold = cfg_.voi.bone_threshold;
    opt.min_component_voxels = cfg_.voi.min_component_voxels;
    opt.histogram_bins = cfg_.voi.histogram_bins;
    const BinaryMask coarse =
        probability ? coarse_mask_from_probability(*probability, opt) : coarse_mask_from_intensity(*intensity_, opt);
    box_scale_ = box_scale(coarse.geometry(), intensity_->geometry());
    if (two) {
      const SplitResult split = split_left_right(coarse, cfg_.voi.margin_voxels);
      left_box_ = split.left;
      right_box_ = split.right;
      split_x_ = coarse.geometry().world(0.5 * static_cast<double>(split.gap_begin + split.gap_end + 1), 0, 0).x();
    } else {
      (cfg_.left ? left_box_ : right_box_) = bounding_box(coarse, cfg_.voi.margin_voxels);
    }
    return 0;
  });
}

JointMasks Runner::load_masks(const std::string& name, const SideInput& input, const SideGrid& grid,
                              std::optional<TriangleMesh>& seed) {
  switch (input.source) {
    case SideInput::Source::Segment:
      return stage("enhancement", name,
                   [&] { return segment_joint(*grid.intensity, cfg_.enhancement, cfg_.voi); });
    case SideInput::Source::Mask: {
      auto load = [&](const std::filesystem::path& p) {
        BinaryMask m = read_mask(p);
        if (grid.box && intensity_ && m.geometry() == intensity_->geometry()) {
          return crop(m, *grid.box, box_scale_, &result_.warnings);
        }
        return m;
      };
      JointMasks jm = stage("load", name, [&] { return JointMasks{load(input.mc), load(input.tb)}; });
      stage("enhancement", name, [&] {
        require_same_geometry(jm.mc.geometry(), jm.tb.geometry(), "mc and tb masks");
        if (count(mask_and(jm.mc, jm.tb)) > 0) {
          result_.warnings.push_back(name + ": mc and tb masks overlap; overlap removed from tb");
          jm.tb = mask_andnot(jm.tb, jm.mc);
        }
        return 0;
      });
      return jm;
    }
    case SideInput::Source::Mesh: {
      TriangleMesh mc = stage("load", name, [&] { return read_stl(input.mc); });
      TriangleMesh tb = stage("load", name, [&] { return read_stl(input.tb); });
      if (enclosed_volume(mc) < 0.0) mc = flipped(mc);
      JointMasks jm = stage("voxelize", name, [&] {
        JointMasks v{voxelize(mc, grid.geometry), voxelize(tb, grid.geometry)};
        v.tb = mask_andnot(v.tb, v.mc);
        return v;
      });
      seed = std::move(mc);
      return jm;
    }
  }
  fail(ErrorKind::Config, "unknown side source");
}

SideResult Runner::run_side(const std::string& name, const SideInput& input, const SideGrid& grid) {
  SideResult r;
  r.side = name;
  r.box = grid.box;
  std::optional<TriangleMesh> seed;
  const JointMasks jm = load_masks(name, input, grid, seed);
  if (count(jm.mc) == 0 || count(jm.tb) == 0) {
    throw StageError(Error(ErrorKind::Degenerate, name + ": empty condyle or confining bone mask"), "enhancement",
                     name);
  }
  {
    Vec3 sum = Vec3::Zero();
    std::size_t n = 0;
    const auto& g = jm.mc.geometry();
    for (std::size_t k = 0; k < g.nz(); ++k) {
      for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
          if (!jm.mc(i, j, k)) continue;
          sum += g.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
          ++n;
        }
      }
    }
    r.mc_centroid_mm = sum / static_cast<double>(n);
  }

  const TriangleMesh surface =
      seed ? *seed : stage("surface", name, [&] { return extract_surface(jm.mc, cfg_.surface); });
  const VoxelGrid sdf = stage("distance", name, [&] { return distance_field(jm.tb); });
  InflationResult inflated = stage("inflate", name, [&] {
    cfg_.inflation.validate(sdf.geometry());
    return inflate(surface, sdf, cfg_.inflation);
  });
  r.trace = std::move(inflated.trace);
  switch (input.clip_mode) {
    case SideInput::ClipMode::None: break;
    case SideInput::ClipMode::Plane: r.clip = input.clip; break;
    case SideInput::ClipMode::Auto: r.clip = stage("clip", name, [&] { return auto_neck_plane(jm.mc); }); break;
  }
  r.nv = stage("negative_volume", name, [&] { return negative_volume(inflated.mesh, jm.mc, jm.tb, r.clip); });

  stage("write", name, [&] {
    const auto& out = cfg_.output_dir;
    write_stl(r.nv.mesh, out / (name + "_nv.stl"));
    write_mask(out / (name + "_nv_mask"), r.nv.mask);
    r.trace.write_csv(out / (name + "_trace.csv"));
    return 0;
  });
  return r;
}

json side_json(const SideResult& s) {
  json j;
  j["box"] = s.box ? s.box->to_json() : json(nullptr);
  j["clip"] = s.clip ? to_json(*s.clip) : json(nullptr);
  j["vertex_count"] = s.trace.vertex_count;
  j["iterations"] = s.trace.records.size();
  j["final_free_count"] = s.trace.records.empty() ? s.trace.vertex_count : s.trace.records.back().free_count;
  j["min_sdf_mm"] = s.trace.records.empty() ? json(nullptr) : json(s.trace.records.back().min_sdf_mm);
  j["mean_displacement_mm"] = s.trace.records.empty() ? 0.0 : s.trace.records.back().mean_displacement_mm;
  j["nv_volume_mm3"] = enclosed_volume(s.nv.mesh);
  j["nv_voxel_volume_mm3"] = volume_mm3(s.nv.mask);
  j["nv_surface_area_mm2"] = surface_area(s.nv.mesh);
  j["mc_centroid_mm"] = {s.mc_centroid_mm.x(), s.mc_centroid_mm.y(), s.mc_centroid_mm.z()};
  return j;
}

void Runner::run() {
  stage("config", "", [&] {
    cfg_.validate();
    std::filesystem::create_directories(cfg_.output_dir);
    return 0;
  });
  if (!cfg_.intensity.empty()) intensity_ = stage("load", "", [&] { return read_grid(cfg_.intensity); });
  if (intensity_ && cfg_.voi.enabled) locate();

  std::optional<GridGeometry> reference;
  if (!cfg_.reference_grid.empty()) reference = stage("load", "", [&] { return read_geometry(cfg_.reference_grid); });

  for (const auto& [name, input, box] :
       {std::tuple{std::string("left"), &cfg_.left, &left_box_}, std::tuple{std::string("right"), &cfg_.right, &right_box_}}) {
    if (!*input) continue;
    SideGrid grid;
    grid.box = *box;
    if (intensity_) {
      grid.intensity = grid.box ? stage("voi", name, [&] { return crop(*intensity_, *grid.box, box_scale_, &result_.warnings); })
                                : *intensity_;
      grid.geometry = grid.intensity->geometry();
    } else if (reference) {
      grid.geometry = *reference;
    }
    result_.sides.push_back(run_side(name, **input, grid));
  }

  json report;
  std::string sagittal_source;
  double sagittal_x = 0.0;
  if (result_.sides.size() == 2) {
    if (cfg_.metrics.sagittal_x_mm) {
      sagittal_x = *cfg_.metrics.sagittal_x_mm;
      sagittal_source = "config";
    } else if (split_x_) {
      sagittal_x = *split_x_;
      sagittal_source = "voi_split";
    } else {
      sagittal_x = 0.5 * (result_.sides[0].mc_centroid_mm.x() + result_.sides[1].mc_centroid_mm.x());
      sagittal_source = "condyle_centroids";
    }
    result_.symmetry = stage("metrics", "", [&] {
      SymmetryOptions opt;
      opt.samples = cfg_.metrics.samples;
      opt.seed = cfg_.metrics.seed;
      opt.convergence_check = cfg_.metrics.convergence_check;
      return compare_sides(result_.sides[0].nv.mesh, result_.sides[1].nv.mesh, sagittal_x, opt);
    });
  }

  for (const auto& s : result_.sides) report["sides"][s.side] = side_json(s);
  report["symmetry"] = result_.symmetry ? result_.symmetry->to_json() : json(nullptr);
  report["sagittal_source"] = result_.symmetry ? json(sagittal_source) : json(nullptr);
  report["warnings"] = result_.warnings;
  report["config"] = to_json(cfg_);
  result_.report = std::move(report);
  stage("write", "", [&] {
    write_json_file(cfg_.output_dir / "report.json", result_.report);
    return 0;
  });
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult result;
  const auto t0 = Clock::now();
  Runner(cfg, result).run();
  result.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  try {
    write_json_file(cfg.output_dir / "timing.json", result.timing_json());
  } catch (const Error& e) {
    throw StageError(e, "write", "");
  }
  return result;
}

}  // namespace negvol
