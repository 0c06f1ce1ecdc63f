#pragma once

#include "sheetscape/anomaly.hpp"
#include "sheetscape/grid.hpp"
#include "sheetscape/scene.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sheetscape {

inline constexpr std::string_view kSceneSchemaVersion = "1";

/// Scene document: UTF-8 JSON with top-level keys version, config, groups,
/// glyphs in that order; the view range sits inside config. Colors are sRGB byte triples. Equal scenes
/// give identical bytes. See docs/scene-document.md.
std::string write_scene_document(const SceneModel& scene);

/// Inverse of write_scene_document; rebuilds the pick map and bounds.
/// Throws BadMessage on malformed input.
SceneModel parse_scene_document(std::string_view text);

struct GltfOptions {
  std::size_t max_instances = 1'000'000;
};

/// glTF 2.0 binary (.glb). Bars are instances of a unit cube and tiles
/// instances of a unit quad via EXT_mesh_gpu_instancing, one instancing node
/// per (kind, color); surface patches are merged into one indexed mesh.
/// Instance names "cell_<row>_<col>" are kept in each node's extras. Throws
/// SceneTooLarge when bars plus tiles exceed max_instances.
std::vector<std::byte> write_gltf(const SceneModel& scene, const GltfOptions& options = {});

/// sRGB byte to linear-light component in [0, 1].
double srgb_to_linear(std::uint8_t c);

enum class ReportFormat { CsvTable, Document };

/// CsvTable: header `row,col,detector,score,context` and one line per flag
/// in report order, scores with 6 significant digits. Document: JSON with
/// params, cells_scanned and flags.
std::string write_report(const AnomalyReport& report, ReportFormat format);

/// Inverse of the Document form. Throws BadMessage.
AnomalyReport parse_report_document(std::string_view text);

/// RFC 4180 CSV; numbers in shortest round-trip form, Empty as an empty
/// field, CRLF between records.
std::string write_csv(const CellGrid& grid, char delimiter = ',');

}  // namespace sheetscape
