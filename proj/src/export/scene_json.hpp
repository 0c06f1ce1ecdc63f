#pragma once

#include "sheetscape/scene.hpp"

#include <json.hpp>

namespace sheetscape::detail {

// Shared by the scene document and the sync protocol.
nlohmann::ordered_json glyph_to_json(const Glyph& glyph);
Glyph glyph_from_json(const nlohmann::ordered_json& record);
nlohmann::ordered_json scene_to_json(const SceneModel& scene);
SceneModel scene_from_json(const nlohmann::ordered_json& doc);

}  // namespace sheetscape::detail
