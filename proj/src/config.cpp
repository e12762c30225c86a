#include "negvol/config.hpp"

#include "negvol/grid_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace negvol {

using nlohmann::json;

namespace {

// Strict object reader: done() rejects keys that were never asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::Config, where_ + ": expected an object");
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(ErrorKind::Config, where_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::Config, where_ + ": bad value for '" + key + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vec3 vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::Config, where + ": expected [x, y, z]");
  Vec3 v;
  for (int a = 0; a < 3; ++a) {
    if (!j[a].is_number()) fail(ErrorKind::Config, where + ": expected numbers");
    v[a] = j[a].get<double>();
  }
  return v;
}

json vec3_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

SideInput side_from_json(const json& j, const std::string& where, const std::filesystem::path& base) {
  Fields f(j, where);
  SideInput s;
  int sources = 0;
  if (f.has("mc_mask") || f.has("tb_mask")) {
    ++sources;
    s.source = SideInput::Source::Mask;
    std::string mc, tb;
    f.get("mc_mask", mc);
    f.get("tb_mask", tb);
    if (mc.empty() || tb.empty()) fail(ErrorKind::Config, where + ": mask input needs both mc_mask and tb_mask");
    s.mc = resolve(base, mc);
    s.tb = resolve(base, tb);
  }
  if (f.has("mc_mesh") || f.has("tb_mesh")) {
    ++sources;
    s.source = SideInput::Source::Mesh;
    std::string mc, tb;
    f.get("mc_mesh", mc);
    f.get("tb_mesh", tb);
    if (mc.empty() || tb.empty()) fail(ErrorKind::Config, where + ": mesh input needs both mc_mesh and tb_mesh");
    s.mc = resolve(base, mc);
    s.tb = resolve(base, tb);
  }
  bool segment = false;
  f.get("segment", segment);
  if (segment) {
    ++sources;
    s.source = SideInput::Source::Segment;
  }
  if (sources != 1) {
    fail(ErrorKind::Config, where + ": exactly one bone source is required (masks, meshes, or segment)");
  }
  if (f.has("clip")) {
    const json& c = f.at("clip");
    if (c.is_string() && c.get<std::string>() == "auto") {
      s.clip_mode = SideInput::ClipMode::Auto;
    } else if (c.is_string() && c.get<std::string>() == "none") {
      s.clip_mode = SideInput::ClipMode::None;
    } else {
      s.clip_mode = SideInput::ClipMode::Plane;
      s.clip = clip_plane_from_json(c);
    }
  }
  f.done();
  return s;
}

json side_to_json(const SideInput& s) {
  json j;
  switch (s.source) {
    case SideInput::Source::Mask:
      j["mc_mask"] = s.mc.string();
      j["tb_mask"] = s.tb.string();
      break;
    case SideInput::Source::Mesh:
      j["mc_mesh"] = s.mc.string();
      j["tb_mesh"] = s.tb.string();
      break;
    case SideInput::Source::Segment:
      j["segment"] = true;
      break;
  }
  switch (s.clip_mode) {
    case SideInput::ClipMode::None: j["clip"] = "none"; break;
    case SideInput::ClipMode::Auto: j["clip"] = "auto"; break;
    case SideInput::ClipMode::Plane: j["clip"] = to_json(s.clip); break;
  }
  return j;
}

}  // namespace

json to_json(const InflationConfig& c) {
  return {{"step_mm", c.step_mm},         {"clearance_mm", c.clearance_mm},     {"lambda", c.lambda},
          {"smooth_every", c.smooth_every}, {"max_iterations", c.max_iterations}, {"stop_fraction", c.stop_fraction}};
}

InflationConfig inflation_config_from_json(const json& j) {
  Fields f(j, "inflation");
  InflationConfig c;
  f.get("step_mm", c.step_mm);
  f.get("clearance_mm", c.clearance_mm);
  f.get("lambda", c.lambda);
  f.get("smooth_every", c.smooth_every);
  f.get("max_iterations", c.max_iterations);
  f.get("stop_fraction", c.stop_fraction);
  f.done();
  c.validate();
  return c;
}

json to_json(const ClipPlane& p) { return {{"point_mm", vec3_to_json(p.point)}, {"normal", vec3_to_json(p.normal)}}; }

ClipPlane clip_plane_from_json(const json& j) {
  Fields f(j, "clip");
  ClipPlane p;
  if (!f.has("point_mm") || !f.has("normal")) fail(ErrorKind::Config, "clip: needs point_mm and normal");
  p.point = vec3_from_json(f.at("point_mm"), "clip.point_mm");
  p.normal = vec3_from_json(f.at("normal"), "clip.normal");
  f.done();
  p.validate();
  return p;
}

json to_json(const PhantomSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"condyle_radius_mm", s.condyle_radius_mm},
          {"fossa_radius_mm", s.fossa_radius_mm},
          {"neck_length_mm", s.neck_length_mm},
          {"shell_thickness_mm", s.shell_thickness_mm},
          {"dims", s.dims},
          {"spacing_mm", s.spacing_mm},
          {"noise_sigma", s.noise_sigma},
          {"asymmetry_scale", s.asymmetry_scale},
          {"seed", s.seed}};
}

PhantomSpec phantom_spec_from_json(const json& j) {
  Fields f(j, "phantom");
  PhantomSpec s;
  std::string kind = to_string(s.kind);
  f.get("kind", kind);
  s.kind = phantom_kind_from_string(kind);
  f.get("condyle_radius_mm", s.condyle_radius_mm);
  f.get("fossa_radius_mm", s.fossa_radius_mm);
  f.get("neck_length_mm", s.neck_length_mm);
  f.get("shell_thickness_mm", s.shell_thickness_mm);
  f.get("dims", s.dims);
  f.get("spacing_mm", s.spacing_mm);
  f.get("noise_sigma", s.noise_sigma);
  f.get("asymmetry_scale", s.asymmetry_scale);
  f.get("seed", s.seed);
  f.done();
  s.validate();
  return s;
}

json to_json(const PipelineConfig& c) {
  json j;
  j["intensity"] = c.intensity.string();
  j["probability"] = c.probability.string();
  j["reference_grid"] = c.reference_grid.string();
  j["output_dir"] = c.output_dir.string();
  if (c.left) j["left"] = side_to_json(*c.left);
  if (c.right) j["right"] = side_to_json(*c.right);
  j["voi"] = {{"enabled", c.voi.enabled},
              {"margin_voxels", c.voi.margin_voxels},
              {"min_component_voxels", c.voi.min_component_voxels},
              {"bone_threshold", c.voi.bone_threshold ? json(*c.voi.bone_threshold) : json(nullptr)},
              {"histogram_bins", c.voi.histogram_bins}};
  const auto& e = c.enhancement;
  j["enhancement"] = {{"enabled", e.enabled},           {"median_radius", e.median_radius},
                      {"close_radius", e.close_radius}, {"open_radius", e.open_radius},
                      {"canny", e.canny},               {"canny_sigma_mm", e.canny_sigma_mm},
                      {"canny_low", e.canny_low},       {"canny_high", e.canny_high}};
  j["surface"] = {{"iso", c.surface.iso}, {"smooth_sigma_voxels", c.surface.smooth_sigma_voxels}};
  j["inflation"] = to_json(c.inflation);
  j["metrics"] = {{"samples", c.metrics.samples},
                  {"seed", c.metrics.seed},
                  {"convergence_check", c.metrics.convergence_check},
                  {"sagittal_x_mm", c.metrics.sagittal_x_mm ? json(*c.metrics.sagittal_x_mm) : json("auto")}};
  return j;
}

PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  Fields f(j, "config");
  PipelineConfig c;
  std::string s;
  auto path_field = [&](const char* key, std::filesystem::path& out) {
    std::string v;
    f.get(key, v);
    if (!v.empty()) out = resolve(base_dir, v);
  };
  path_field("intensity", c.intensity);
  path_field("probability", c.probability);
  path_field("reference_grid", c.reference_grid);
  c.output_dir = resolve(base_dir, c.output_dir.string());
  path_field("output_dir", c.output_dir);
  if (f.has("left")) c.left = side_from_json(f.at("left"), "left", base_dir);
  if (f.has("right")) c.right = side_from_json(f.at("right"), "right", base_dir);
  if (f.has("voi")) {
    Fields v(f.at("voi"), "voi");
    v.get("enabled", c.voi.enabled);
    v.get("margin_voxels", c.voi.margin_voxels);
    v.get("min_component_voxels", c.voi.min_component_voxels);
    if (v.has("bone_threshold")) {
      double t = 0.0;
      v.get("bone_threshold", t);
      c.voi.bone_threshold = t;
    }
    v.get("histogram_bins", c.voi.histogram_bins);
    v.done();
  }
  if (f.has("enhancement")) {
    Fields e(f.at("enhancement"), "enhancement");
    auto& x = c.enhancement;
    e.get("enabled", x.enabled);
    e.get("median_radius", x.median_radius);
    e.get("close_radius", x.close_radius);
    e.get("open_radius", x.open_radius);
    e.get("canny", x.canny);
    e.get("canny_sigma_mm", x.canny_sigma_mm);
    e.get("canny_low", x.canny_low);
    e.get("canny_high", x.canny_high);
    e.done();
  }
  if (f.has("surface")) {
    Fields sf(f.at("surface"), "surface");
    sf.get("iso", c.surface.iso);
    sf.get("smooth_sigma_voxels", c.surface.smooth_sigma_voxels);
    sf.done();
  }
  if (f.has("inflation")) c.inflation = inflation_config_from_json(f.at("inflation"));
  if (f.has("metrics")) {
    Fields m(f.at("metrics"), "metrics");
    m.get("samples", c.metrics.samples);
    m.get("seed", c.metrics.seed);
    m.get("convergence_check", c.metrics.convergence_check);
    if (m.has("sagittal_x_mm")) {
      const json& x = m.at("sagittal_x_mm");
      if (x.is_number()) {
        c.metrics.sagittal_x_mm = x.get<double>();
      } else if (!(x.is_string() && x.get<std::string>() == "auto")) {
        fail(ErrorKind::Config, "metrics: sagittal_x_mm must be a number or \"auto\"");
      }
    }
    m.done();
  }
  f.done();
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "config: " + what); };
  if (!left && !right) bad("no joint sides configured");
  auto need_file = [&](const std::filesystem::path& p, const std::string& what) {
    if (p.empty()) bad(what + " path is missing");
    std::error_code ec;
    if (!std::filesystem::exists(p, ec) && !std::filesystem::exists(sidecar_path(p), ec)) {
      bad(what + " not found: " + p.string());
    }
  };
  if (!intensity.empty()) need_file(intensity, "intensity");
  if (!probability.empty()) {
    need_file(probability, "probability map");
    if (intensity.empty()) bad("a probability map needs the intensity grid it localizes");
  }
  if (!reference_grid.empty()) need_file(reference_grid, "reference grid");
  for (const auto* side : {&left, &right}) {
    if (!*side) continue;
    const std::string name = side == &left ? "left" : "right";
    const SideInput& s = **side;
    switch (s.source) {
      case SideInput::Source::Mask:
        need_file(s.mc, name + " mc_mask");
        need_file(s.tb, name + " tb_mask");
        break;
      case SideInput::Source::Mesh:
        need_file(s.mc, name + " mc_mesh");
        need_file(s.tb, name + " tb_mesh");
        if (intensity.empty() && reference_grid.empty()) {
          bad(name + ": mesh inputs need an intensity or reference grid to voxelize onto");
        }
        break;
      case SideInput::Source::Segment:
        if (intensity.empty()) bad(name + ": segmenting needs an intensity grid");
        break;
    }
  }
  if (left && right && !intensity.empty() && voi.enabled == false) {
    for (const auto* side : {&left, &right}) {
      if ((*side)->source == SideInput::Source::Segment) {
        bad("segmenting two sides from one grid needs the VOI split enabled");
      }
    }
  }
  if (voi.margin_voxels < 0) bad("voi.margin_voxels must be >= 0");
  if (voi.histogram_bins < 2) bad("voi.histogram_bins must be >= 2");
  const auto& e = enhancement;
  if (e.median_radius < 0 || e.close_radius < 0 || e.open_radius < 0) bad("enhancement radii must be >= 0");
  if (!(e.canny_sigma_mm > 0.0)) bad("enhancement.canny_sigma_mm must be > 0");
  if (!(e.canny_low >= 0.0 && e.canny_low <= e.canny_high && e.canny_high <= 1.0)) {
    bad("enhancement canny thresholds must satisfy 0 <= low <= high <= 1");
  }
  if (!(surface.iso > 0.0 && surface.iso < 1.0)) bad("surface.iso must be in (0, 1)");
  if (!(surface.smooth_sigma_voxels >= 0.0)) bad("surface.smooth_sigma_voxels must be >= 0");
  inflation.validate();
  if (metrics.samples == 0) bad("metrics.samples must be > 0");
  for (const auto* side : {&left, &right}) {
    if (*side && (*side)->clip_mode == SideInput::ClipMode::Plane) (*side)->clip.validate();
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace negvol
