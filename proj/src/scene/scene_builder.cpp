#include "scene/scene_internal.hpp"

#include "sheetscape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sheetscape {

std::vector<Rgb> default_group_palette() {
  return {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {214, 39, 40},
          {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127}};
}

void SceneConfig::validate() const {
  if (!(policy.height_max > 0.0) || !std::isfinite(policy.height_max)) {
    throw std::invalid_argument("height_max must be positive and finite");
  }
  if (!(cell_pitch > 0.0) || !std::isfinite(cell_pitch)) {
    throw std::invalid_argument("cell_pitch must be positive and finite");
  }
  if (policy.mode == NormalizationMode::PerFormatGroup && group_cue_palette.empty()) {
    throw std::invalid_argument("per-format normalization needs a non-empty palette");
  }
}

std::string_view normalization_mode_name(NormalizationMode mode) {
  return mode == NormalizationMode::Uniform ? "uniform" : "per-format";
}

std::optional<NormalizationMode> parse_normalization_mode(std::string_view name) {
  if (name == "uniform") return NormalizationMode::Uniform;
  if (name == "per-format" || name == "per_format") return NormalizationMode::PerFormatGroup;
  return std::nullopt;
}

std::string_view glyph_mode_name(GlyphMode mode) {
  return mode == GlyphMode::Bars ? "bars" : "surface";
}

std::optional<GlyphMode> parse_glyph_mode(std::string_view name) {
  if (name == "bars") return GlyphMode::Bars;
  if (name == "surface") return GlyphMode::Surface;
  return std::nullopt;
}

std::string_view glyph_kind_name(GlyphKind kind) {
  switch (kind) {
    case GlyphKind::Bar: return "bar";
    case GlyphKind::Tile: return "tile";
    case GlyphKind::Label: return "label";
    case GlyphKind::SurfacePatch: return "surface_patch";
  }
  return "tile";
}

std::optional<GlyphKind> parse_glyph_kind(std::string_view name) {
  for (auto k : {GlyphKind::Bar, GlyphKind::Tile, GlyphKind::Label, GlyphKind::SurfacePatch}) {
    if (glyph_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<CellAddress> SceneModel::address_of(GlyphId id) const {
  auto it = pick_by_id.find(id);
  if (it == pick_by_id.end()) return std::nullopt;
  return it->second;
}

std::optional<GlyphId> SceneModel::glyph_for(const CellAddress& addr) const {
  auto it = pick_by_addr.find(addr);
  if (it == pick_by_addr.end()) return std::nullopt;
  return it->second;
}

std::span<const Glyph> SceneModel::glyphs_at(const CellAddress& addr) const {
  auto [lo, hi] = std::equal_range(
      glyphs.begin(), glyphs.end(), addr,
      [](const auto& a, const auto& b) {
        auto key = [](const auto& v) -> const CellAddress& {
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Glyph>) {
            return v.addr;
          } else {
            return v;
          }
        };
        return key(a) < key(b);
      });
  return {lo, hi};
}

namespace detail {

namespace {

Vec3 cell_position(const CellAddress& a, double pitch) {
  return {static_cast<double>(a.col) * pitch, 0.0, static_cast<double>(a.row) * pitch};
}

Rgb bar_color(const Cell& cell, const SceneConfig& config, const PolicyEcho& echo) {
  if (config.policy.mode == NormalizationMode::PerFormatGroup) {
    if (auto g = group_index(echo, cell.format.category)) {
      return config.group_cue_palette[*g % config.group_cue_palette.size()];
    }
  }
  return cell.format.fill_color.value_or(config.default_bar_color);
}

double height_of(const Cell& cell, const SceneConfig& config, const PolicyEcho& echo) {
  const auto g = group_index(echo, cell.format.category);
  return scaled_height(cell.value.as_number(), echo.groups.at(*g), config.policy);
}

void emit_tile(const CellAddress& addr, const Cell& cell, const SceneConfig& config,
               GlyphId& next_id, std::vector<Glyph>& out) {
  Glyph tile;
  tile.id = next_id++;
  tile.kind = GlyphKind::Tile;
  tile.addr = addr;
  tile.position = cell_position(addr, config.cell_pitch);
  tile.color = cell.format.fill_color.value_or(kDefaultTileColor);
  tile.border = cell.format.border;
  out.push_back(std::move(tile));
}

void emit_label(const CellAddress& addr, const Cell& cell, const SceneConfig& config,
                GlyphId& next_id, std::vector<Glyph>& out) {
  Glyph label;
  label.id = next_id++;
  label.kind = GlyphKind::Label;
  label.addr = addr;
  label.position = cell_position(addr, config.cell_pitch);
  label.color = Rgb{0, 0, 0};
  label.text = cell.value.as_text();
  out.push_back(std::move(label));
}

}  // namespace

bool is_primary(GlyphKind kind) { return kind != GlyphKind::Tile; }

PolicyEcho compute_policy_echo(const GridView& view, const NormalizationPolicy& policy) {
  std::vector<NormalizeInput> inputs;
  view.for_each([&](const CellAddress& a, const Cell& c) {
    if (c.value.is_number()) inputs.push_back({a, c.value.as_number(), c.format.category});
  });
  PolicyEcho echo{policy, {}};
  echo.groups = normalize(inputs, policy).groups;
  return echo;
}

void emit_bar_cell(const CellAddress& addr, const Cell& cell, const SceneConfig& config,
                   const PolicyEcho& echo, GlyphId& next_id, std::vector<Glyph>& out) {
  if (!cell.bears_content_or_format()) return;
  emit_tile(addr, cell, config, next_id, out);
  if (cell.value.is_number()) {
    Glyph bar;
    bar.id = next_id++;
    bar.kind = GlyphKind::Bar;
    bar.addr = addr;
    bar.position = cell_position(addr, config.cell_pitch);
    bar.height = height_of(cell, config, echo);
    bar.color = bar_color(cell, config, echo);
    out.push_back(std::move(bar));
  } else if (cell.value.is_text()) {
    emit_label(addr, cell, config, next_id, out);
  }
}

void emit_surface_cell(const GridView& view, const CellAddress& addr, const SceneConfig& config,
                       const PolicyEcho& echo, GlyphId& next_id, std::vector<Glyph>& out) {
  const Cell& cell = view.at(addr);
  if (!cell.value.is_number()) {
    emit_bar_cell(addr, cell, config, echo, next_id, out);
    return;
  }
  const CellRange& r = view.range();
  if (addr.row >= r.bottom || addr.col >= r.right) return;
  const std::array<CellAddress, 4> corners = {
      addr, CellAddress{addr.row, addr.col + 1}, CellAddress{addr.row + 1, addr.col},
      CellAddress{addr.row + 1, addr.col + 1}};
  Glyph patch;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Cell& corner = view.at(corners[i]);
    if (!corner.value.is_number()) return;  // a hole
    patch.corners[i] = height_of(corner, config, echo);
  }
  patch.id = next_id++;
  patch.kind = GlyphKind::SurfacePatch;
  patch.addr = addr;
  patch.position = cell_position(addr, config.cell_pitch);
  patch.height = patch.corners[0];
  patch.color = bar_color(cell, config, echo);
  out.push_back(std::move(patch));
}

}  // namespace detail

void refresh_bounds(SceneModel& scene) {
  if (scene.glyphs.empty()) {
    scene.bounds = {};
    return;
  }
  const double half = scene.config.cell_pitch / 2.0;
  Vec3 lo{INFINITY, INFINITY, INFINITY};
  Vec3 hi{-INFINITY, -INFINITY, -INFINITY};
  auto grow = [&](double x0, double x1, double y0, double y1, double z0, double z1) {
    lo.x = std::min(lo.x, x0);
    hi.x = std::max(hi.x, x1);
    lo.y = std::min(lo.y, y0);
    hi.y = std::max(hi.y, y1);
    lo.z = std::min(lo.z, z0);
    hi.z = std::max(hi.z, z1);
  };
  for (const auto& g : scene.glyphs) {
    const Vec3& p = g.position;
    switch (g.kind) {
      case GlyphKind::Bar:
        grow(p.x - half, p.x + half, std::min(0.0, g.height), std::max(0.0, g.height),
             p.z - half, p.z + half);
        break;
      case GlyphKind::SurfacePatch: {
        const auto [mn, mx] = std::minmax_element(g.corners.begin(), g.corners.end());
        const double pitch = scene.config.cell_pitch;
        grow(p.x, p.x + pitch, *mn, *mx, p.z, p.z + pitch);
        break;
      }
      default:
        grow(p.x - half, p.x + half, 0.0, 0.0, p.z - half, p.z + half);
        break;
    }
  }
  scene.bounds = {lo, hi};
}

namespace {

SceneModel start_scene(const GridView& view, const SceneConfig& config) {
  config.validate();
  SceneModel scene;
  scene.config = config;
  scene.range = view.range();
  scene.policy_echo = detail::compute_policy_echo(view, config.policy);
  return scene;
}

void finish_scene(SceneModel& scene) {
  for (const auto& g : scene.glyphs) {
    if (detail::is_primary(g.kind)) {
      scene.pick_by_id.emplace(g.id, g.addr);
      scene.pick_by_addr.emplace(g.addr, g.id);
    }
  }
  refresh_bounds(scene);
}

}  // namespace

SceneModel build_bar_scene(const GridView& view, const SceneConfig& config, bool allow_empty) {
  SceneModel scene = start_scene(view, config);
  GlyphId next_id = 0;
  view.for_each([&](const CellAddress& a, const Cell& c) {
    detail::emit_bar_cell(a, c, config, scene.policy_echo, next_id, scene.glyphs);
  });
  if (scene.glyphs.empty() && !allow_empty) {
    throw EmptyView("range " + to_string(view.range()) + " has nothing to draw");
  }
  finish_scene(scene);
  return scene;
}

SceneModel build_surface_scene(const GridView& view, const SceneConfig& config,
                               bool allow_empty) {
  SceneModel scene = start_scene(view, config);
  if (!allow_empty) {
    bool any = false;
    view.for_each([&](const CellAddress&, const Cell& c) { any |= c.bears_content_or_format(); });
    if (!any) throw EmptyView("range " + to_string(view.range()) + " has nothing to draw");
    if (scene.policy_echo.groups.empty()) {
      throw NoNumericCells("range " + to_string(view.range()) + " has no numeric cells");
    }
  }
  GlyphId next_id = 0;
  view.for_each([&](const CellAddress& a, const Cell&) {
    detail::emit_surface_cell(view, a, config, scene.policy_echo, next_id, scene.glyphs);
  });
  finish_scene(scene);
  return scene;
}

SceneModel build_scene(const GridView& view, const SceneConfig& config, bool allow_empty) {
  return config.glyph_mode == GlyphMode::Surface
             ? build_surface_scene(view, config, allow_empty)
             : build_bar_scene(view, config, allow_empty);
}

}  // namespace sheetscape
