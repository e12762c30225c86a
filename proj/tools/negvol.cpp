#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "negvol/config.hpp"
#include "negvol/grid_io.hpp"
#include "negvol/marching_cubes.hpp"
#include "negvol/mesh_io.hpp"
#include "negvol/phantom.hpp"
#include "negvol/pipeline.hpp"
#include "negvol/voxelize.hpp"
#include "negvol/distance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace negvol;

namespace {

int cmd_run(const fs::path& config_path) {
  const json j = read_json_file(config_path);
  const PipelineConfig cfg = pipeline_config_from_json(j, config_path.parent_path());
  const PipelineResult r = run_pipeline(cfg);
  for (const auto& s : r.sides) {
    std::printf("%s: NV %.2f mm3 (voxel %.2f mm3), %zu iterations\n", s.side.c_str(), enclosed_volume(s.nv.mesh),
                volume_mm3(s.nv.mask), s.trace.records.size());
  }
  if (r.symmetry) std::printf("S_LR %.4f  H_LR %.3f mm\n", r.symmetry->S_LR, r.symmetry->H_LR_mm);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("artifacts in %s (%.2f s)\n", cfg.output_dir.string().c_str(), r.total_seconds);
  return 0;
}

int cmd_phantom(const fs::path& spec_path, const fs::path& out, double clearance) {
  const PhantomSpec spec = phantom_spec_from_json(read_json_file(spec_path));
  const Phantom p = generate_phantom(spec);
  fs::create_directories(out);
  write_grid(out / "intensity", p.intensity);

  json truth;
  truth["spec"] = to_json(spec);
  truth["clearance_mm"] = clearance;
  truth["sagittal_x_mm"] = p.sagittal_x_mm;
  PipelineConfig cfg;
  cfg.intensity = "intensity.json";
  cfg.output_dir = "out";
  cfg.inflation.clearance_mm = clearance;
  for (std::size_t n = 0; n < p.joints.size(); ++n) {
    const JointPhantom& jp = p.joints[n];
    const std::string side = n == 0 ? "left" : "right";
    write_mask(out / (side + "_mc"), jp.mc);
    write_mask(out / (side + "_tb"), jp.tb);
    truth["joints"][side] = {{"center_mm", {jp.center.x(), jp.center.y(), jp.center.z()}},
                             {"condyle_radius_mm", jp.condyle_radius_mm},
                             {"fossa_radius_mm", jp.fossa_radius_mm},
                             {"clip", jp.clip ? to_json(*jp.clip) : json(nullptr)},
                             {"nv_volume_mm3", jp.truth_nv_volume_mm3()},
                             {"nv_volume_corrected_mm3", jp.truth_nv_volume_mm3(clearance)}};
    SideInput s;
    s.source = SideInput::Source::Segment;
    s.clip_mode = jp.clip ? SideInput::ClipMode::Plane : SideInput::ClipMode::None;
    if (jp.clip) s.clip = *jp.clip;
    (n == 0 ? cfg.left : cfg.right) = s;
  }
  if (p.joints.size() == 2) {
    truth["S_LR_quadratic"] = spec.asymmetry_scale * spec.asymmetry_scale;
    cfg.metrics.sagittal_x_mm = p.sagittal_x_mm;
  }
  write_json_file(out / "truth.json", truth);
  write_json_file(out / "pipeline.json", to_json(cfg));
  std::printf("wrote %s phantom to %s\n", to_string(spec.kind).c_str(), out.string().c_str());
  return 0;
}

int cmd_metrics(const fs::path& left, const fs::path& right, const SymmetryOptions& opt,
                std::optional<double> mirror_x, bool no_mirror, const fs::path& out) {
  const TriangleMesh l = read_stl(left);
  TriangleMesh r = read_stl(right);
  double x = 0.0;
  if (no_mirror) {
    // compare_sides mirrors about x; pre-mirroring about the same plane cancels it.
    r = mirrored_x(r, 0.0);
  } else if (mirror_x) {
    x = *mirror_x;
  } else {
    x = 0.5 * (surface_centroid(l).x() + surface_centroid(r).x());
  }
  const SymmetryReport rep = compare_sides(l, r, x, opt);
  const std::string text = rep.to_json().dump(2);
  if (out.empty()) {
    std::printf("%s\n", text.c_str());
  } else {
    write_json_file(out, rep.to_json());
  }
  return 0;
}

int cmd_voxelize(const fs::path& mesh, const fs::path& like, const fs::path& out, bool surface_only) {
  const GridGeometry g = read_geometry(like);
  VoxelizeOptions opt;
  opt.surface_only = surface_only;
  const BinaryMask m = voxelize(read_stl(mesh), g, opt);
  write_mask(out, m);
  std::printf("%zu voxels (%.2f mm3)\n", count(m), volume_mm3(m));
  return 0;
}

int cmd_extract(const fs::path& mask, const fs::path& out, const SurfaceOptions& opt, bool ascii, bool obj) {
  const TriangleMesh mesh = extract_surface(read_mask(mask), opt);
  if (obj) {
    write_obj(mesh, out);
  } else {
    write_stl(mesh, out, ascii ? StlFormat::Ascii : StlFormat::Binary);
  }
  std::printf("%zu vertices, %zu faces, volume %.2f mm3\n", mesh.vertices.size(), mesh.faces.size(),
              enclosed_volume(mesh));
  return 0;
}

int cmd_inflate(const fs::path& mc, const fs::path& tb, const fs::path& out, const fs::path& trace,
                const InflationConfig& cfg) {
  const VoxelGrid sdf = distance_field(read_mask(tb));
  cfg.validate(sdf.geometry());
  const InflationResult r = inflate(read_stl(mc), sdf, cfg);
  write_stl(r.mesh, out);
  if (!trace.empty()) r.trace.write_csv(trace);
  std::printf("%zu iterations, volume %.2f -> %.2f mm3\n", r.trace.records.size(), r.trace.initial_volume_mm3,
              enclosed_volume(r.mesh));
  return 0;
}

int cmd_config_init(const fs::path& out) {
  PipelineConfig cfg;
  cfg.intensity = "intensity.json";
  SideInput side;
  cfg.left = side;
  cfg.right = side;
  if (out.empty()) {
    std::printf("%s\n", to_json(cfg).dump(2).c_str());
  } else {
    write_json_file(out, to_json(cfg));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negative-volume extraction for articulating joints"};
  app.require_subcommand(1);

  fs::path run_config;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a JSON config");
  run->add_option("config", run_config, "Pipeline config")->required();

  fs::path phantom_spec, phantom_out = "phantom";
  double phantom_clearance = InflationConfig{}.clearance_mm;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic joint phantom with analytic truth");
  phantom->add_option("spec", phantom_spec, "Phantom spec JSON")->required();
  phantom->add_option("-o,--out", phantom_out, "Output directory");
  phantom->add_option("--clearance", phantom_clearance, "Clearance used for the corrected truth (mm)");

  fs::path m_left, m_right, m_out;
  SymmetryOptions m_opt;
  std::optional<double> m_mirror;
  bool m_no_mirror = false;
  auto* metrics = app.add_subcommand("metrics", "Compare left and right negative-volume meshes");
  metrics->add_option("left", m_left)->required();
  metrics->add_option("right", m_right)->required();
  metrics->add_option("--samples", m_opt.samples, "Points sampled per surface");
  metrics->add_option("--seed", m_opt.seed);
  metrics->add_option("--mirror-x", m_mirror, "Sagittal plane x (mm); centroid midpoint by default");
  metrics->add_flag("--no-mirror", m_no_mirror, "Compare without mirroring the right side")->excludes("--mirror-x");
  metrics->add_option("-o,--out", m_out, "Write the report here instead of stdout");

  fs::path v_mesh, v_like, v_out;
  bool v_surface = false;
  auto* vox = app.add_subcommand("voxelize", "Rasterize an STL mesh onto a grid");
  vox->add_option("mesh", v_mesh)->required();
  vox->add_option("--like", v_like, "Grid whose geometry to use")->required();
  vox->add_option("-o,--out", v_out)->required();
  vox->add_flag("--surface-only", v_surface, "Mark only voxels touched by the surface");

  fs::path e_mask, e_out;
  SurfaceOptions e_opt;
  bool e_ascii = false, e_obj = false;
  auto* ext = app.add_subcommand("extract", "Extract a surface mesh from a mask");
  ext->add_option("mask", e_mask)->required();
  ext->add_option("-o,--out", e_out)->required();
  ext->add_option("--smooth-sigma", e_opt.smooth_sigma_voxels, "Gaussian sigma in voxels, 0 for binary");
  ext->add_flag("--ascii", e_ascii, "ASCII STL");
  ext->add_flag("--obj", e_obj, "Wavefront OBJ")->excludes("--ascii");

  fs::path i_mc, i_tb, i_out, i_trace;
  InflationConfig i_cfg;
  auto* inf = app.add_subcommand("inflate", "Inflate a condyle mesh inside a confining-bone mask");
  inf->add_option("mc", i_mc, "Condyle STL")->required();
  inf->add_option("tb", i_tb, "Confining-bone mask")->required();
  inf->add_option("-o,--out", i_out)->required();
  inf->add_option("--trace", i_trace, "Per-iteration CSV");
  inf->add_option("--step", i_cfg.step_mm);
  inf->add_option("--clearance", i_cfg.clearance_mm);
  inf->add_option("--lambda", i_cfg.lambda);
  inf->add_option("--smooth-every", i_cfg.smooth_every);
  inf->add_option("--max-iterations", i_cfg.max_iterations);
  inf->add_option("--stop-fraction", i_cfg.stop_fraction);

  fs::path c_out;
  auto* config = app.add_subcommand("config", "Config utilities");
  config->require_subcommand(1);
  auto* init = config->add_subcommand("init", "Print the default config");
  init->add_option("-o,--out", c_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  try {
    if (*run) return cmd_run(run_config);
    if (*phantom) return cmd_phantom(phantom_spec, phantom_out, phantom_clearance);
    if (*metrics) return cmd_metrics(m_left, m_right, m_opt, m_mirror, m_no_mirror, m_out);
    if (*vox) return cmd_voxelize(v_mesh, v_like, v_out, v_surface);
    if (*ext) return cmd_extract(e_mask, e_out, e_opt, e_ascii, e_obj);
    if (*inf) return cmd_inflate(i_mc, i_tb, i_out, i_trace, i_cfg);
    if (*init) return cmd_config_init(c_out);
  } catch (const StageError& e) {
    std::fprintf(stderr, "negvol: %s error: %s (stage=%s side=%s)\n", to_string(e.kind()), e.what(),
                 e.stage().c_str(), e.side().empty() ? "-" : e.side().c_str());
    return exit_code(e.kind());
  } catch (const Error& e) {
    std::fprintf(stderr, "negvol: %s error: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "negvol: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
