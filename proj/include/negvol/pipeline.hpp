#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "negvol/config.hpp"
#include "negvol/inflate.hpp"
#include "negvol/symmetry.hpp"
#include "negvol/voi.hpp"

namespace negvol {

/// A module error annotated with the pipeline stage and side it came from.
class StageError : public Error {
 public:
  StageError(const Error& cause, std::string stage, std::string side)
      : Error(cause.kind(), cause.what()), stage_(std::move(stage)), side_(std::move(side)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& side() const noexcept { return side_; }

 private:
  std::string stage_;
  std::string side_;
};

struct JointMasks {
  BinaryMask mc;
  BinaryMask tb;
};

/// Splits one joint's intensity sub-grid into condyle and confining bone:
/// optional slice-wise median denoising, bone threshold, TB = largest
/// component, MC = second largest, close/open, then Canny edges of the
/// denoised grid are added to TB near TB and away from MC. The masks are
/// disjoint. Throws Degenerate when fewer than two components are found.
JointMasks segment_joint(const VoxelGrid& intensity, const EnhancementConfig& enhancement, const VoiConfig& voi);

struct StageTime {
  std::string stage;
  std::string side;
  double seconds = 0.0;
};

struct SideResult {
  std::string side;
  std::optional<BoundingBox> box;
  std::optional<ClipPlane> clip;
  InflationTrace trace;
  NegativeVolume nv;
  /// World centroid of the condyle mask.
  Vec3 mc_centroid_mm = Vec3::Zero();
};

struct PipelineResult {
  std::vector<SideResult> sides;
  std::optional<SymmetryReport> symmetry;
  std::vector<std::string> warnings;
  /// Deterministic summary; written as report.json.
  nlohmann::json report;
  std::vector<StageTime> timings;
  double total_seconds = 0.0;

  nlohmann::json timing_json() const;
};

/// Runs every configured side (left, then right) and the symmetry
/// comparison, writing into cfg.output_dir:
///   {side}_nv.stl, {side}_nv_mask.{json,raw}, {side}_trace.csv,
///   report.json, timing.json.
/// Module errors are rethrown as StageError.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace negvol
