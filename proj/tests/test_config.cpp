#include <doctest.h>

#include <fstream>

#include "negvol/config.hpp"
#include "negvol/grid_io.hpp"
#include "support.hpp"

using namespace negvol;
using nlohmann::json;

namespace {

std::filesystem::path fixture_dir() {
  static const auto dir = [] {
    const auto d = testsupport::scratch_dir("config");
    write_grid(d / "img", VoxelGrid(testsupport::cube_geometry(4), 1.0f));
    write_mask(d / "mc", BinaryMask(testsupport::cube_geometry(4)));
    write_mask(d / "tb", BinaryMask(testsupport::cube_geometry(4)));
    return d;
  }();
  return dir;
}

json minimal() { return {{"intensity", "img.json"}, {"left", {{"segment", true}}}}; }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("a minimal config fills in defaults and resolves relative paths") {
  const PipelineConfig c = pipeline_config_from_json(minimal(), fixture_dir());
  CHECK(c.intensity == fixture_dir() / "img.json");
  CHECK(c.output_dir == fixture_dir() / "negvol_out");
  REQUIRE(c.left.has_value());
  CHECK_FALSE(c.right.has_value());
  CHECK(c.left->source == SideInput::Source::Segment);
  CHECK(c.left->clip_mode == SideInput::ClipMode::Auto);
  CHECK(c.inflation.clearance_mm == 0.2);
  CHECK(c.metrics.samples == 20000);
  CHECK_FALSE(c.metrics.sagittal_x_mm.has_value());
}

TEST_CASE("configs round trip through JSON") {
  json j = minimal();
  j["right"] = {{"mc_mask", "mc.json"}, {"tb_mask", "tb.json"}, {"clip", {{"point_mm", {1, 2, 3}}, {"normal", {0, 0, -1}}}}};
  j["inflation"] = {{"step_mm", 0.05}, {"max_iterations", 80}};
  j["metrics"] = {{"sagittal_x_mm", 1.5}, {"seed", 9}};
  j["voi"] = {{"bone_threshold", 0.4}};
  const PipelineConfig c = pipeline_config_from_json(j, fixture_dir());
  CHECK(c.right->source == SideInput::Source::Mask);
  CHECK(c.right->clip.point.isApprox(Vec3(1, 2, 3)));
  CHECK(c.inflation.step_mm == 0.05);
  CHECK(*c.metrics.sagittal_x_mm == 1.5);
  CHECK(*c.voi.bone_threshold == 0.4);
  const json once = to_json(c);
  CHECK(to_json(pipeline_config_from_json(once)) == once);
}

TEST_CASE("unknown keys and wrong types are config errors") {
  auto rejects = [](const json& j) {
    try {
      pipeline_config_from_json(j, fixture_dir());
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Config;
    }
    return false;
  };
  json j = minimal();
  j["colour"] = 1;
  CHECK(rejects(j));
  j = minimal();
  j["inflation"] = {{"stepmm", 0.1}};
  CHECK(rejects(j));
  j = minimal();
  j["inflation"] = {{"step_mm", "fast"}};
  CHECK(rejects(j));
  j = minimal();
  j["inflation"] = {{"lambda", 2.0}};
  CHECK(rejects(j));
  j = minimal();
  j["metrics"] = {{"sagittal_x_mm", "left"}};
  CHECK(rejects(j));
  CHECK(rejects(json::array()));
}

TEST_CASE("each side needs exactly one existing bone source") {
  auto rejects = [](const json& side) {
    json j = minimal();
    j["left"] = side;
    try {
      pipeline_config_from_json(j, fixture_dir());
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Config;
    }
    return false;
  };
  CHECK(rejects(json::object()));
  CHECK(rejects({{"segment", true}, {"mc_mask", "mc.json"}, {"tb_mask", "tb.json"}}));
  CHECK(rejects({{"mc_mask", "mc.json"}}));
  CHECK(rejects({{"mc_mask", "mc.json"}, {"tb_mask", "missing.json"}}));
  CHECK(rejects({{"segment", true}, {"clip", {{"point_mm", {0, 0, 0}}, {"normal", {0, 0, 2}}}}}));
  CHECK(rejects({{"segment", true}, {"clip", "sometimes"}}));
  CHECK_FALSE(rejects({{"mc_mask", "mc.json"}, {"tb_mask", "tb.json"}, {"clip", "none"}}));
  json no_sides = minimal();
  no_sides.erase("left");
  CHECK_THROWS_AS(pipeline_config_from_json(no_sides, fixture_dir()), Error);
}

TEST_CASE("phantom specs and clip planes parse strictly") {
  PhantomSpec s;
  s.kind = PhantomKind::AsymmetricPair;
  s.dims = {180, 88, 88};
  s.asymmetry_scale = 1.05;
  const PhantomSpec back = phantom_spec_from_json(to_json(s));
  CHECK(back.kind == s.kind);
  CHECK(back.dims == s.dims);
  CHECK(back.asymmetry_scale == 1.05);
  CHECK_THROWS_AS(phantom_spec_from_json({{"kind", "concentric_spheres"}, {"radius", 3}}), Error);
  CHECK_THROWS_AS(clip_plane_from_json({{"point_mm", {0, 0}}, {"normal", {0, 0, 1}}}), Error);
}

TEST_CASE("malformed JSON files are I/O errors") {
  const auto p = fixture_dir() / "bad.json";
  std::ofstream(p) << "{ \"a\": ";
  try {
    read_json_file(p);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  CHECK_THROWS_AS(read_json_file(fixture_dir() / "nope.json"), Error);
}

}  // TEST_SUITE
