#include "glb.hpp"
#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"
#include "sheetscape/ingest.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

using namespace sheetscape;
using namespace sheetscape::testing;
using nlohmann::json;

namespace {

GridView whole(const CellGrid& g) { return select_range(g, g.full_range()); }

CellGrid numeric_grid(std::size_t rows, std::size_t cols) {
  CellGrid g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      g.at({r, c}).value = CellValue::number(static_cast<double>((r * 7 + c * 3) % 50));
    }
  }
  return g;
}

// A scene holding exactly one Bar glyph and nothing else.
SceneModel single_bar() {
  CellGrid g(1, 1);
  g.at({0, 0}).value = CellValue::number(3);
  SceneModel s = build_bar_scene(whole(g), {});
  std::erase_if(s.glyphs, [](const Glyph& gl) { return gl.kind != GlyphKind::Bar; });
  s.glyphs[0].id = 0;
  s.pick_by_id = {{0, {0, 0}}};
  s.pick_by_addr = {{{0, 0}, 0}};
  refresh_bounds(s);
  return s;
}

SceneModel surface_2x2() {
  CellGrid g(2, 2);
  g.at({0, 0}).value = CellValue::number(1);
  g.at({0, 1}).value = CellValue::number(2);
  g.at({1, 0}).value = CellValue::number(3);
  g.at({1, 1}).value = CellValue::number(4);
  SceneConfig c;
  c.glyph_mode = GlyphMode::Surface;
  return build_surface_scene(whole(g), c);
}

void expect_valid(const std::vector<std::byte>& glb, const std::string& name) {
  const GlbAsset a = inspect_glb(glb);
  for (const auto& p : a.problems) INFO(p);
  CHECK(a.ok());
  TempDir dir;
  const auto path = dir / (name + ".glb");
  std::ofstream(path, std::ios::binary)
      .write(reinterpret_cast<const char*>(glb.data()), static_cast<std::streamsize>(glb.size()));
  std::string out;
  const int rc = run_gltf_validator(path, &out);
  if (rc == -1) {
    MESSAGE("glTF validator not available; structural checks only");
    return;
  }
  INFO(out);
  CHECK(rc == 0);
}

}  // namespace

TEST_CASE("scene document: empty scene") {
  CellGrid g(2, 2);
  const SceneModel s = build_bar_scene(whole(g), {}, true);
  const std::string doc = write_scene_document(s);
  const json j = json::parse(doc);
  CHECK(j["glyphs"].empty());
  CHECK(j["version"] == std::string(kSceneSchemaVersion));
  // nlohmann::json sorts keys, so check the order in the text itself.
  const auto at = [&](const char* k) { return doc.find(std::string("\"") + k + "\""); };
  CHECK(at("version") < at("config"));
  CHECK(at("config") < at("groups"));
  CHECK(at("groups") < at("glyphs"));
  CHECK(parse_scene_document(doc) == s);
}

TEST_CASE("scene document: one bar") {
  const SceneModel s = single_bar();
  const json j = json::parse(write_scene_document(s));
  REQUIRE(j["glyphs"].size() == 1);
  CHECK(j["glyphs"][0]["kind"] == "bar");
  CHECK(j["glyphs"][0]["color"] == json::array({kDefaultBarColor.r, kDefaultBarColor.g, kDefaultBarColor.b}));
  CHECK(parse_scene_document(write_scene_document(s)) == s);
}

TEST_CASE("property: scene document round trip is byte-identical") {
  Rng rng(51);
  for (int i = 0; i < 150; ++i) {
    const CellGrid g = random_grid(rng, rng.between(1, 10), rng.between(1, 10));
    const SceneConfig c = random_config(rng, rng.chance(0.5) ? GlyphMode::Bars : GlyphMode::Surface);
    const SceneModel s = build_scene(select_range(g, random_range(rng, g)), c, true);
    const std::string doc = write_scene_document(s);
    const SceneModel back = parse_scene_document(doc);
    CHECK(back == s);
    CHECK(write_scene_document(back) == doc);
  }
}

TEST_CASE("scene document: malformed input") {
  CHECK_THROWS_AS(parse_scene_document("not json"), BadMessage);
  CHECK_THROWS_AS(parse_scene_document("{}"), BadMessage);
  json j = json::parse(write_scene_document(single_bar()));
  j["glyphs"][0]["kind"] = "cone";
  CHECK_THROWS_AS(parse_scene_document(j.dump()), BadMessage);
  j = json::parse(write_scene_document(single_bar()));
  j["version"] = "99";
  CHECK_THROWS_AS(parse_scene_document(j.dump()), BadMessage);
  j = json::parse(write_scene_document(single_bar()));
  j["glyphs"][0]["row"] = -1;
  CHECK_THROWS_AS(parse_scene_document(j.dump()), BadMessage);
  j = json::parse(write_scene_document(single_bar()));
  j["glyphs"][0]["id"] = 7;  // ids must be dense
  CHECK_THROWS_AS(parse_scene_document(j.dump()), BadMessage);
}

TEST_CASE("glTF: one bar is one named instance") {
  const auto glb = write_gltf(single_bar());
  const GlbAsset a = inspect_glb(glb);
  REQUIRE(a.ok());
  CHECK(a.instance_count("bars_") == 1);
  CHECK(a.instance_count("tiles_") == 0);
  CHECK(a.instance_names("bars_") == std::vector<std::string>{"cell_0_0"});
  expect_valid(glb, "one_bar");
}

TEST_CASE("glTF: 300x250 numeric view") {
  const CellGrid g = numeric_grid(300, 250);
  const SceneModel s = build_bar_scene(whole(g), {});
  const auto glb = write_gltf(s);
  const GlbAsset a = inspect_glb(glb);
  for (const auto& p : a.problems) INFO(p);
  REQUIRE(a.ok());
  CHECK(a.instance_count("bars_") == 75000);
  CHECK(a.instance_count("tiles_") == 75000);
  const auto names = a.instance_names("bars_");
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 75000);
  expect_valid(glb, "big");

  GltfOptions tight;
  tight.max_instances = 149'999;
  CHECK_THROWS_AS(write_gltf(s, tight), SceneTooLarge);
  tight.max_instances = 150'000;
  CHECK_NOTHROW(write_gltf(s, tight));
}

TEST_CASE("glTF: a 2x2 surface is one mesh of two triangles") {
  const auto glb = write_gltf(surface_2x2());
  const GlbAsset a = inspect_glb(glb);
  REQUIRE(a.ok());
  CHECK(a.instance_count("bars_") == 0);
  std::size_t surfaces = 0;
  for (const auto& node : a.doc["nodes"]) {
    if (node.value("name", "").rfind("surface", 0) != 0) continue;
    ++surfaces;
    const auto& prim = a.doc["meshes"][node["mesh"].get<std::size_t>()]["primitives"][0];
    const auto pos = a.read_floats(prim["attributes"]["POSITION"]);
    const auto idx = a.read_indices(prim["indices"]);
    CHECK(pos.size() == 4 * 3);
    CHECK(idx.size() == 6);
    // Heights 1..4 normalize to 0, 1/3, 2/3, 1.
    std::vector<float> ys;
    for (std::size_t k = 1; k < pos.size(); k += 3) ys.push_back(pos[k]);
    std::sort(ys.begin(), ys.end());
    CHECK(ys[0] == doctest::Approx(0.0));
    CHECK(ys[3] == doctest::Approx(1.0));
  }
  CHECK(surfaces == 1);
  expect_valid(glb, "surface");
}

TEST_CASE("property: glTF instance counts follow the scene") {
  Rng rng(52);
  for (int i = 0; i < 40; ++i) {
    const CellGrid g = random_grid(rng, rng.between(1, 12), rng.between(1, 12));
    const SceneConfig c = random_config(rng, rng.chance(0.5) ? GlyphMode::Bars : GlyphMode::Surface);
    const SceneModel s = build_scene(whole(g), c, true);
    const auto n = oracle::actual_counts(s);
    const GlbAsset a = inspect_glb(write_gltf(s));
    for (const auto& p : a.problems) INFO(p);
    REQUIRE(a.ok());
    CHECK(a.instance_count("bars_") == n.bars);
    CHECK(a.instance_count("tiles_") == n.tiles);
    CHECK(write_gltf(s) == write_gltf(s));
  }
}

TEST_CASE("srgb_to_linear") {
  CHECK(srgb_to_linear(0) == 0.0);
  CHECK(srgb_to_linear(255) == doctest::Approx(1.0));
  CHECK(srgb_to_linear(10) == doctest::Approx(10.0 / 255.0 / 12.92));
  CHECK(srgb_to_linear(128) == doctest::Approx(std::pow((128.0 / 255.0 + 0.055) / 1.055, 2.4)));
}

TEST_CASE("report: CSV table") {
  AnomalyReport empty;
  CHECK(write_report(empty, ReportFormat::CsvTable) == "row,col,detector,score,context\r\n");
  AnomalyReport one;
  one.flags.push_back({{3, 4}, Detector::Fin, 7.123456789, "row 3: 12, median 2"});
  const std::string csv = write_report(one, ReportFormat::CsvTable);
  CHECK(csv == "row,col,detector,score,context\r\n3,4,fin,7.12346,\"row 3: 12, median 2\"\r\n");
}

TEST_CASE("report: document round trip") {
  Rng rng(53);
  for (int i = 0; i < 50; ++i) {
    const CellGrid g = random_grid(rng, rng.between(1, 8), rng.between(3, 30));
    DetectorParams p;
    p.z_threshold = rng.uniform(1, 4);
    const AnomalyReport r = run_report(whole(g), p);
    const std::string doc = write_report(r, ReportFormat::Document);
    CHECK(parse_report_document(doc) == r);
  }
  CHECK_THROWS_AS(parse_report_document("[1,2]"), BadMessage);
}

TEST_CASE("write_csv") {
  CellGrid g(2, 3);
  g.at({0, 0}).value = CellValue::number(2.5);
  g.at({0, 1}).value = CellValue::text("a,b");
  g.at({1, 2}).value = CellValue::text("say \"hi\"");
  CHECK(write_csv(g) == "2.5,\"a,b\",\r\n,,\"say \"\"hi\"\"\"");
  CHECK(write_csv(g, ';') == "2.5;a,b;\r\n;;\"say \"\"hi\"\"\"");

  CellGrid n(1, 3);
  n.at({0, 0}).value = CellValue::number(0.1);
  n.at({0, 1}).value = CellValue::number(1e300);
  n.at({0, 2}).value = CellValue::number(-3);
  CHECK(write_csv(n) == "0.1,1e+300,-3");
}

TEST_CASE("property: write_csv then read_csv keeps values") {
  Rng rng(54);
  for (int i = 0; i < 200; ++i) {
    GridShape shape;
    shape.p_category = 0;
    CellGrid g = random_grid(rng, rng.between(1, 8), rng.between(1, 8), shape);
    // Text that reads as a number would come back as a number.
    for (std::size_t r = 0; r < g.n_rows(); ++r) {
      for (std::size_t c = 0; c < g.n_cols(); ++c) {
        Cell& cell = g.at({r, c});
        cell.format = {};
        if (cell.value.is_text()) cell.value = CellValue::text("t" + cell.value.as_text());
      }
    }
    const CellGrid back = read_csv(write_csv(g));
    const std::size_t rows = std::min(back.n_rows(), g.n_rows());
    for (std::size_t r = 0; r < g.n_rows(); ++r) {
      for (std::size_t c = 0; c < g.n_cols(); ++c) {
        const CellValue& want = g.at({r, c}).value;
        const bool inside = r < rows && c < back.n_cols();
        if (!inside) {
          CHECK(want.is_empty());
          continue;
        }
        CHECK(back.at({r, c}).value == want);
      }
    }
  }
}
