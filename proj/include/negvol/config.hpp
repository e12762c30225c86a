#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "negvol/inflate.hpp"
#include "negvol/marching_cubes.hpp"
#include "negvol/phantom.hpp"

namespace negvol {

/// Where one joint's bone geometry comes from. Exactly one per side.
struct SideInput {
  enum class Source { Mask, Mesh, Segment };
  Source source = Source::Segment;
  /// Mask or mesh paths for the condyle and the confining bone.
  std::filesystem::path mc;
  std::filesystem::path tb;

  enum class ClipMode { None, Plane, Auto };
  ClipMode clip_mode = ClipMode::Auto;
  ClipPlane clip;
};

struct VoiConfig {
  bool enabled = true;
  long margin_voxels = 8;
  std::size_t min_component_voxels = 100;
  /// On normalized intensity; minimum method when unset.
  std::optional<double> bone_threshold;
  std::size_t histogram_bins = 256;
};

struct EnhancementConfig {
  bool enabled = true;
  int median_radius = 1;
  int close_radius = 1;
  int open_radius = 1;
  bool canny = true;
  double canny_sigma_mm = 0.6;
  double canny_low = 0.1;
  double canny_high = 0.2;
};

struct MetricsConfig {
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  bool convergence_check = true;
  /// Mirror plane; derived from the VOI split or the condyle centroids when unset.
  std::optional<double> sagittal_x_mm;
};

struct PipelineConfig {
  std::filesystem::path intensity;
  std::filesystem::path probability;
  /// Geometry for voxelizing mesh inputs when no intensity grid is given.
  std::filesystem::path reference_grid;
  std::filesystem::path output_dir = "negvol_out";
  std::optional<SideInput> left;
  std::optional<SideInput> right;
  VoiConfig voi;
  EnhancementConfig enhancement;
  SurfaceOptions surface;
  InflationConfig inflation;
  MetricsConfig metrics;

  /// Checks everything that can be checked without reading inputs,
  /// including that each side names exactly one bone source and that the
  /// files it needs exist. Throws Config.
  void validate() const;
};

nlohmann::json to_json(const InflationConfig& c);
InflationConfig inflation_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ClipPlane& p);
ClipPlane clip_plane_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PhantomSpec& s);
PhantomSpec phantom_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PipelineConfig& c);
/// Relative paths, including the default output directory, are resolved
/// against `base_dir`. Unknown keys are errors.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Parses a JSON file; Io on unreadable or malformed files.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace negvol
