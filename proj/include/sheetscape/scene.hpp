#pragma once

#include "sheetscape/grid.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheetscape {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

enum class NormalizationMode { Uniform, PerFormatGroup };

/// "uniform" / "per-format"; parsing also accepts "per_format".
std::string_view normalization_mode_name(NormalizationMode mode);
std::optional<NormalizationMode> parse_normalization_mode(std::string_view name);

struct NormalizationPolicy {
  NormalizationMode mode = NormalizationMode::Uniform;
  double height_max = 1.0;  // must be > 0
  bool signed_baseline = false;

  friend bool operator==(const NormalizationPolicy&, const NormalizationPolicy&) = default;
};

enum class GlyphMode { Bars, Surface };

std::string_view glyph_mode_name(GlyphMode mode);  // "bars" / "surface"
std::optional<GlyphMode> parse_glyph_mode(std::string_view name);

inline constexpr Rgb kDefaultBarColor{70, 130, 180};
inline constexpr Rgb kDefaultTileColor{200, 200, 200};

std::vector<Rgb> default_group_palette();

struct SceneConfig {
  NormalizationPolicy policy;
  GlyphMode glyph_mode = GlyphMode::Bars;
  double cell_pitch = 1.0;
  Rgb default_bar_color = kDefaultBarColor;
  std::vector<Rgb> group_cue_palette = default_group_palette();

  /// Throws std::invalid_argument when h_max or the pitch is not positive
  /// and finite, or the palette is empty in per-format mode.
  void validate() const;

  friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

enum class GlyphKind { Bar, Tile, Label, SurfacePatch };

std::string_view glyph_kind_name(GlyphKind kind);
std::optional<GlyphKind> parse_glyph_kind(std::string_view name);

using GlyphId = std::uint32_t;

/// One renderable element bound to one cell. Positions are cell centres on
/// the ground plane: x = col * pitch, z = row * pitch. Bars rise from y = 0
/// by `height` (negative heights hang below the plane).
struct Glyph {
  GlyphId id = 0;
  GlyphKind kind = GlyphKind::Tile;
  CellAddress addr;
  Vec3 position;
  double height = 0.0;
  Rgb color;
  std::optional<std::string> text;  // Label only
  BorderFlags border;               // Tile only
  /// SurfacePatch only: heights at (r,c), (r,c+1), (r+1,c), (r+1,c+1).
  std::array<double, 4> corners{};

  friend bool operator==(const Glyph&, const Glyph&) = default;
};

/// Scaling bounds of one normalization group. `category` is empty for the
/// single group of Uniform mode.
struct GroupBounds {
  std::optional<FormatCategory> category;
  double v_min = 0.0;
  double v_max = 0.0;
  std::size_t count = 0;

  friend bool operator==(const GroupBounds&, const GroupBounds&) = default;
};

struct PolicyEcho {
  NormalizationPolicy policy;
  std::vector<GroupBounds> groups;  // ordered by category

  friend bool operator==(const PolicyEcho&, const PolicyEcho&) = default;
};

struct Bounds {
  Vec3 min;
  Vec3 max;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct SceneModel {
  SceneConfig config;
  CellRange range;
  std::vector<Glyph> glyphs;  // glyphs[i].id == i, row-major by cell
  /// Primary glyph (Bar, Label or SurfacePatch) of each content-bearing cell.
  std::map<GlyphId, CellAddress> pick_by_id;
  std::map<CellAddress, GlyphId> pick_by_addr;
  Bounds bounds;
  PolicyEcho policy_echo;

  std::optional<CellAddress> address_of(GlyphId id) const;
  std::optional<GlyphId> glyph_for(const CellAddress& addr) const;
  /// All glyphs bound to one cell, in id order.
  std::span<const Glyph> glyphs_at(const CellAddress& addr) const;

  friend bool operator==(const SceneModel&, const SceneModel&) = default;
};

struct SceneDelta {
  enum class Kind { Incremental, FullRebuild };

  Kind kind = Kind::Incremental;
  std::vector<Glyph> changed;  // Incremental only
  std::vector<GlyphId> removed;
  std::string reason;

  friend bool operator==(const SceneDelta&, const SceneDelta&) = default;
};

struct NormalizeInput {
  CellAddress addr;
  double value = 0.0;
  FormatCategory category = FormatCategory::General;
};

struct NormalizedHeight {
  CellAddress addr;
  double height = 0.0;
};

struct Normalization {
  std::vector<NormalizedHeight> heights;  // same order as the input
  std::vector<GroupBounds> groups;
};

/// Min-max scaling to [0, h_max], per group. Uniform mode uses one group;
/// per-format mode one group per category present. With signed_baseline and
/// a group straddling zero, heights are v * h_max / max(|v_min|, |v_max|).
/// A group whose values are all equal maps to h_max / 2.
Normalization normalize(std::span<const NormalizeInput> values,
                        const NormalizationPolicy& policy);

/// Height of one value inside a known group.
double scaled_height(double value, const GroupBounds& group,
                     const NormalizationPolicy& policy);

/// Index into policy_echo.groups for a category, or nullopt when that
/// category has no numeric cells.
std::optional<std::size_t> group_index(const PolicyEcho& echo, FormatCategory category);

/// Bar-mode scene. Throws EmptyView when the view has no content- or
/// format-bearing cell unless allow_empty is set.
SceneModel build_bar_scene(const GridView& view, const SceneConfig& config,
                           bool allow_empty = false);

/// Heightfield over numeric cell centres; one patch per quad whose four
/// corners are numeric. Throws EmptyView, or NoNumericCells when there is
/// nothing to mesh (both suppressed by allow_empty).
SceneModel build_surface_scene(const GridView& view, const SceneConfig& config,
                               bool allow_empty = false);

/// Dispatches on config.glyph_mode.
SceneModel build_scene(const GridView& view, const SceneConfig& config,
                       bool allow_empty = false);

/// Delta for a single edited cell. `view` must already show the edit.
/// Throws ConfigMismatch when `config` or the view range differs from the
/// ones old_scene was built with, and RangeOutOfBounds for an address
/// outside the view.
SceneDelta rebuild_after_edit(const SceneModel& old_scene, const GridView& view,
                              const CellAddress& edited, const SceneConfig& config);

/// Patches an Incremental delta into a scene. Throws std::logic_error for a
/// FullRebuild delta or a glyph id the scene does not have.
void apply_delta(SceneModel& scene, const SceneDelta& delta);

/// Recomputes scene.bounds from its glyphs.
void refresh_bounds(SceneModel& scene);

}  // namespace sheetscape
