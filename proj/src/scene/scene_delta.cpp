#include "scene/scene_internal.hpp"

#include "sheetscape/errors.hpp"

#include <stdexcept>

namespace sheetscape {

namespace {

std::vector<GlyphKind> kinds_of(std::span<const Glyph> glyphs) {
  std::vector<GlyphKind> out;
  out.reserve(glyphs.size());
  for (const auto& g : glyphs) out.push_back(g.kind);
  return out;
}

SceneDelta full_rebuild(std::string reason) {
  SceneDelta d;
  d.kind = SceneDelta::Kind::FullRebuild;
  d.reason = std::move(reason);
  return d;
}

}  // namespace

SceneDelta rebuild_after_edit(const SceneModel& old_scene, const GridView& view,
                              const CellAddress& edited, const SceneConfig& config) {
  if (!(old_scene.config == config)) {
    throw ConfigMismatch("scene was built with a different configuration");
  }
  if (!(old_scene.range == view.range())) {
    throw ConfigMismatch("scene covers " + to_string(old_scene.range) + ", view covers " +
                         to_string(view.range()));
  }
  const Cell& cell = view.at(edited);  // RangeOutOfBounds outside the view

  const PolicyEcho echo = detail::compute_policy_echo(view, config.policy);

  std::vector<Glyph> fresh;
  GlyphId scratch_id = 0;
  if (config.glyph_mode == GlyphMode::Surface) {
    detail::emit_surface_cell(view, edited, config, echo, scratch_id, fresh);
  } else {
    detail::emit_bar_cell(edited, cell, config, echo, scratch_id, fresh);
  }

  const auto old_glyphs = old_scene.glyphs_at(edited);
  if (kinds_of(old_glyphs) != kinds_of(fresh)) return full_rebuild("cell kind changed");
  if (!(echo == old_scene.policy_echo)) return full_rebuild("group bounds changed");

  if (config.glyph_mode == GlyphMode::Surface && cell.value.is_number()) {
    // Patches anchored up and to the left also use this cell as a corner.
    const CellRange& r = view.range();
    for (std::size_t dr = 0; dr <= 1; ++dr) {
      for (std::size_t dc = 0; dc <= 1; ++dc) {
        if ((dr == 0 && dc == 0) || edited.row < r.top + dr || edited.col < r.left + dc) {
          continue;
        }
        const CellAddress anchor{edited.row - dr, edited.col - dc};
        for (const auto& g : old_scene.glyphs_at(anchor)) {
          if (g.kind == GlyphKind::SurfacePatch) {
            return full_rebuild("surface patch shared with neighbouring cells");
          }
        }
      }
    }
  }

  SceneDelta delta;
  delta.kind = SceneDelta::Kind::Incremental;
  delta.reason = "cell updated in place";
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    fresh[i].id = old_glyphs[i].id;
    delta.changed.push_back(std::move(fresh[i]));
  }
  return delta;
}

void apply_delta(SceneModel& scene, const SceneDelta& delta) {
  if (delta.kind != SceneDelta::Kind::Incremental) {
    throw std::logic_error("a full-rebuild delta cannot be patched in");
  }
  for (const auto& g : delta.changed) {
    if (g.id >= scene.glyphs.size() || scene.glyphs[g.id].addr != g.addr ||
        scene.glyphs[g.id].kind != g.kind) {
      throw std::logic_error("delta glyph " + std::to_string(g.id) + " does not match the scene");
    }
    scene.glyphs[g.id] = g;
  }
  refresh_bounds(scene);
}

}  // namespace sheetscape
