#pragma once

#include "sheetscape/scene.hpp"

#include <vector>

namespace sheetscape::detail {

/// Normalization groups of the numeric cells in a view.
PolicyEcho compute_policy_echo(const GridView& view, const NormalizationPolicy& policy);

/// Appends the glyphs of one cell for bar mode (Tile, then Bar or Label).
/// Ids are taken from `next_id`, which is advanced.
void emit_bar_cell(const CellAddress& addr, const Cell& cell, const SceneConfig& config,
                   const PolicyEcho& echo, GlyphId& next_id, std::vector<Glyph>& out);

/// Appends the glyphs of one cell for surface mode: non-numeric cells as in
/// bar mode, numeric cells a SurfacePatch when they anchor a full quad.
void emit_surface_cell(const GridView& view, const CellAddress& addr, const SceneConfig& config,
                       const PolicyEcho& echo, GlyphId& next_id, std::vector<Glyph>& out);

bool is_primary(GlyphKind kind);

}  // namespace sheetscape::detail
