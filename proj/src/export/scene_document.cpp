#include "export/scene_json.hpp"

#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"

namespace sheetscape {

namespace {

using ojson = nlohmann::ordered_json;

template <typename T>
T count_of(const ojson& j, const char* key) {
  const ojson& v = j.at(key);
  if (!v.is_number_unsigned()) throw BadMessage(std::string(key) + " must be a non-negative integer");
  return v.get<T>();
}

ojson rgb_json(const Rgb& c) { return ojson::array({c.r, c.g, c.b}); }

Rgb rgb_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 3) throw BadMessage("color must be [r,g,b]");
  Rgb c;
  auto comp = [](const ojson& v) {
    const int x = v.get<int>();
    if (x < 0 || x > 255) throw BadMessage("color component outside 0..255");
    return static_cast<std::uint8_t>(x);
  };
  c.r = comp(j[0]);
  c.g = comp(j[1]);
  c.b = comp(j[2]);
  return c;
}

std::string border_code(const BorderFlags& b) {
  std::string s;
  if (b.left) s += 'l';
  if (b.right) s += 'r';
  if (b.top) s += 't';
  if (b.bottom) s += 'b';
  return s;
}

BorderFlags border_from_code(std::string_view s) {
  BorderFlags b;
  for (char c : s) {
    switch (c) {
      case 'l': b.left = true; break;
      case 'r': b.right = true; break;
      case 't': b.top = true; break;
      case 'b': b.bottom = true; break;
      default: throw BadMessage("unknown border edge code");
    }
  }
  return b;
}

ojson config_json(const SceneConfig& c) {
  ojson palette = ojson::array();
  for (const auto& p : c.group_cue_palette) palette.push_back(rgb_json(p));
  return ojson{
      {"glyph_mode", glyph_mode_name(c.glyph_mode)},
      {"normalization",
       {{"mode", normalization_mode_name(c.policy.mode)},
        {"height_max", c.policy.height_max},
        {"signed_baseline", c.policy.signed_baseline}}},
      {"cell_pitch", c.cell_pitch},
      {"default_bar_color", rgb_json(c.default_bar_color)},
      {"group_cue_palette", std::move(palette)},
  };
}

SceneConfig config_from_json(const ojson& j) {
  SceneConfig c;
  const std::string mode = j.at("glyph_mode").get<std::string>();
  const auto glyph_mode = parse_glyph_mode(mode);
  if (!glyph_mode) throw BadMessage("unknown glyph_mode " + mode);
  c.glyph_mode = *glyph_mode;
  const auto& n = j.at("normalization");
  const std::string nmode = n.at("mode").get<std::string>();
  const auto norm_mode = parse_normalization_mode(nmode);
  if (!norm_mode) throw BadMessage("unknown normalization mode " + nmode);
  c.policy.mode = *norm_mode;
  c.policy.height_max = n.at("height_max").get<double>();
  c.policy.signed_baseline = n.at("signed_baseline").get<bool>();
  c.cell_pitch = j.at("cell_pitch").get<double>();
  c.default_bar_color = rgb_from_json(j.at("default_bar_color"));
  c.group_cue_palette.clear();
  for (const auto& p : j.at("group_cue_palette")) c.group_cue_palette.push_back(rgb_from_json(p));
  return c;
}

}  // namespace

namespace detail {

ojson glyph_to_json(const Glyph& g) {
  ojson rec{{"id", g.id},
            {"kind", glyph_kind_name(g.kind)},
            {"row", g.addr.row},
            {"col", g.addr.col},
            {"position", {g.position.x, g.position.y, g.position.z}},
            {"height", g.height},
            {"color", rgb_json(g.color)}};
  if (g.kind == GlyphKind::Label) rec["text"] = g.text.value_or("");
  if (g.kind == GlyphKind::Tile) rec["border"] = border_code(g.border);
  if (g.kind == GlyphKind::SurfacePatch) {
    rec["corners"] = {g.corners[0], g.corners[1], g.corners[2], g.corners[3]};
  }
  return rec;
}

Glyph glyph_from_json(const ojson& rec) {
  try {
    Glyph g;
    g.id = count_of<GlyphId>(rec, "id");
    auto kind = parse_glyph_kind(rec.at("kind").get<std::string>());
    if (!kind) throw BadMessage("unknown glyph kind");
    g.kind = *kind;
    g.addr = {count_of<std::size_t>(rec, "row"), count_of<std::size_t>(rec, "col")};
    const auto& p = rec.at("position");
    g.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    g.height = rec.at("height").get<double>();
    g.color = rgb_from_json(rec.at("color"));
    if (g.kind == GlyphKind::Label) g.text = rec.at("text").get<std::string>();
    if (g.kind == GlyphKind::Tile) g.border = border_from_code(rec.at("border").get<std::string>());
    if (g.kind == GlyphKind::SurfacePatch) {
      const auto& c = rec.at("corners");
      for (std::size_t i = 0; i < 4; ++i) g.corners[i] = c.at(i).get<double>();
    }
    return g;
  } catch (const ojson::exception& e) {
    throw BadMessage(std::string("malformed glyph record: ") + e.what());
  }
}

ojson scene_to_json(const SceneModel& scene) {
  ojson doc;
  doc["version"] = kSceneSchemaVersion;
  doc["config"] = config_json(scene.config);
  doc["config"]["range"] = {{"top", scene.range.top},
                            {"left", scene.range.left},
                            {"bottom", scene.range.bottom},
                            {"right", scene.range.right}};
  ojson groups = ojson::array();
  for (const auto& g : scene.policy_echo.groups) {
    groups.push_back({{"category", g.category ? category_name(*g.category) : "all"},
                      {"v_min", g.v_min},
                      {"v_max", g.v_max},
                      {"count", g.count}});
  }
  doc["groups"] = std::move(groups);
  ojson glyphs = ojson::array();
  for (const auto& g : scene.glyphs) glyphs.push_back(glyph_to_json(g));
  doc["glyphs"] = std::move(glyphs);
  return doc;
}

SceneModel scene_from_json(const ojson& doc) {
  try {
    if (doc.at("version").get<std::string>() != kSceneSchemaVersion) {
      throw BadMessage("unsupported scene document version");
    }
    SceneModel scene;
    scene.config = config_from_json(doc.at("config"));
    const auto& r = doc.at("config").at("range");
    scene.range = {count_of<std::size_t>(r, "top"), count_of<std::size_t>(r, "left"),
                   count_of<std::size_t>(r, "bottom"), count_of<std::size_t>(r, "right")};
    scene.policy_echo.policy = scene.config.policy;
    for (const auto& g : doc.at("groups")) {
      GroupBounds b;
      const std::string cat = g.at("category").get<std::string>();
      if (cat != "all") {
        b.category = parse_category(cat);
        if (!b.category) throw BadMessage("unknown category " + cat);
      }
      b.v_min = g.at("v_min").get<double>();
      b.v_max = g.at("v_max").get<double>();
      b.count = count_of<std::size_t>(g, "count");
      scene.policy_echo.groups.push_back(b);
    }
    for (const auto& rec : doc.at("glyphs")) {
      Glyph g = glyph_from_json(rec);
      if (g.id != scene.glyphs.size()) throw BadMessage("glyph ids must be dense and ordered");
      if (g.kind != GlyphKind::Tile) {
        scene.pick_by_id.emplace(g.id, g.addr);
        scene.pick_by_addr.emplace(g.addr, g.id);
      }
      scene.glyphs.push_back(std::move(g));
    }
    refresh_bounds(scene);
    return scene;
  } catch (const ojson::exception& e) {
    throw BadMessage(std::string("malformed scene document: ") + e.what());
  }
}

}  // namespace detail

std::string write_scene_document(const SceneModel& scene) {
  return detail::scene_to_json(scene).dump();
}

SceneModel parse_scene_document(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw BadMessage(std::string("scene document is not valid JSON: ") + e.what());
  }
  return detail::scene_from_json(doc);
}

}  // namespace sheetscape
