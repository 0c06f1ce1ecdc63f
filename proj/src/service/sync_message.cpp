#include "export/scene_json.hpp"

#include "sheetscape/errors.hpp"
#include "sheetscape/service.hpp"

namespace sheetscape {

namespace {

using ojson = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <typename T>
T count_field(const ojson& j, const char* key) {
  const ojson& v = j.at(key);
  if (!v.is_number_unsigned()) throw BadMessage(std::string(key) + " must be a non-negative integer");
  return v.get<T>();
}

CellAddress addr_from(const ojson& j) {
  return {count_field<std::size_t>(j, "row"), count_field<std::size_t>(j, "col")};
}

}  // namespace

std::string encode_message(const SyncMessage& message) {
  ojson j = std::visit(
      overloaded{
          [](const EditCell& m) {
            return ojson{{"type", "edit"},
                         {"row", m.addr.row},
                         {"col", m.addr.col},
                         {"raw", m.raw},
                         {"base_revision", m.base_revision}};
          },
          [](const SelectCell& m) {
            return ojson{{"type", "select_cell"}, {"row", m.addr.row}, {"col", m.addr.col}};
          },
          [](const SelectGlyph& m) {
            return ojson{{"type", "select_glyph"}, {"glyph_id", m.glyph_id}};
          },
          [](const SnapshotRequest&) { return ojson{{"type", "snapshot"}}; },
          [](const DeltaMessage& m) {
            ojson changed = ojson::array();
            for (const auto& g : m.delta.changed) changed.push_back(detail::glyph_to_json(g));
            ojson j{{"type", "delta"},
                    {"revision", m.revision},
                    {"kind", m.delta.kind == SceneDelta::Kind::Incremental ? "incremental"
                                                                           : "full_rebuild"},
                    {"reason", m.delta.reason},
                    {"changed", std::move(changed)},
                    {"removed", m.delta.removed}};
            if (m.scene) j["scene"] = detail::scene_to_json(*m.scene);
            return j;
          },
          [](const Selection& m) {
            return ojson{{"type", "selection"},
                         {"row", m.addr.row},
                         {"col", m.addr.col},
                         {"value_preview", m.value_preview},
                         {"glyph_id", m.glyph_id ? ojson(*m.glyph_id) : ojson()}};
          },
          [](const SceneSnapshot& m) {
            return ojson{{"type", "snapshot"},
                         {"revision", m.revision},
                         {"scene", detail::scene_to_json(m.scene)}};
          },
          [](const ErrorMessage& m) {
            return ojson{{"type", "error"}, {"code", m.code}, {"detail", m.detail}};
          },
      },
      message);
  return j.dump();
}

SyncMessage decode_message(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw BadMessage(std::string("message is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw BadMessage("message must be an object");
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "edit") {
      return EditCell{addr_from(j), j.at("raw").get<std::string>(),
                      count_field<Revision>(j, "base_revision")};
    }
    if (type == "select_cell") return SelectCell{addr_from(j)};
    if (type == "select_glyph") return SelectGlyph{count_field<GlyphId>(j, "glyph_id")};
    if (type == "snapshot") {
      if (!j.contains("scene")) return SnapshotRequest{};
      return SceneSnapshot{count_field<Revision>(j, "revision"),
                           detail::scene_from_json(j.at("scene"))};
    }
    if (type == "delta") {
      DeltaMessage m;
      m.revision = count_field<Revision>(j, "revision");
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "incremental") {
        m.delta.kind = SceneDelta::Kind::Incremental;
      } else if (kind == "full_rebuild") {
        m.delta.kind = SceneDelta::Kind::FullRebuild;
      } else {
        throw BadMessage("unknown delta kind " + kind);
      }
      m.delta.reason = j.at("reason").get<std::string>();
      for (const auto& g : j.at("changed")) m.delta.changed.push_back(detail::glyph_from_json(g));
      m.delta.removed = j.at("removed").get<std::vector<GlyphId>>();
      if (j.contains("scene")) m.scene = detail::scene_from_json(j.at("scene"));
      return m;
    }
    if (type == "selection") {
      Selection s{addr_from(j), j.at("value_preview").get<std::string>(), std::nullopt};
      const auto& id = j.at("glyph_id");
      if (!id.is_null()) s.glyph_id = id.get<GlyphId>();
      return s;
    }
    if (type == "error") {
      return ErrorMessage{j.at("code").get<std::string>(), j.at("detail").get<std::string>()};
    }
    throw BadMessage("unknown message type " + type);
  } catch (const ojson::exception& e) {
    throw BadMessage(std::string("malformed message: ") + e.what());
  }
}

ErrorMessage error_message_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return {std::string(error_code_name(err->code())), err->what()};
  }
  if (dynamic_cast<const std::invalid_argument*>(&e)) return {"InvalidArgument", e.what()};
  return {"Internal", e.what()};
}

}  // namespace sheetscape
