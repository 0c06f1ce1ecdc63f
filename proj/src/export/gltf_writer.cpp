#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <tuple>

namespace sheetscape {

double srgb_to_linear(std::uint8_t c) {
  const double s = c / 255.0;
  return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kFloat = 5126;
constexpr int kUnsignedInt = 5125;
constexpr int kArrayBuffer = 34962;
constexpr int kElementArrayBuffer = 34963;

constexpr double kBarFootprint = 0.8;
constexpr double kTileFootprint = 0.96;

struct Float3 {
  float v[3];
};

std::string instance_name(const CellAddress& a) {
  return "cell_" + std::to_string(a.row) + "_" + std::to_string(a.col);
}

std::string hex_color(const Rgb& c) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : {c.r, c.g, c.b}) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

class GltfBuilder {
 public:
  int add_vec3_accessor(const std::vector<Float3>& data, std::optional<int> target,
                        bool with_bounds) {
    const int view = add_view(data.data(), data.size() * sizeof(Float3), target);
    ojson acc{{"bufferView", view},
              {"componentType", kFloat},
              {"count", data.size()},
              {"type", "VEC3"}};
    if (with_bounds) {
      float lo[3] = {std::numeric_limits<float>::max(), std::numeric_limits<float>::max(),
                     std::numeric_limits<float>::max()};
      float hi[3] = {std::numeric_limits<float>::lowest(), std::numeric_limits<float>::lowest(),
                     std::numeric_limits<float>::lowest()};
      for (const auto& p : data) {
        for (int k = 0; k < 3; ++k) {
          lo[k] = std::min(lo[k], p.v[k]);
          hi[k] = std::max(hi[k], p.v[k]);
        }
      }
      acc["min"] = {lo[0], lo[1], lo[2]};
      acc["max"] = {hi[0], hi[1], hi[2]};
    }
    accessors_.push_back(std::move(acc));
    return static_cast<int>(accessors_.size()) - 1;
  }

  int add_index_accessor(const std::vector<std::uint32_t>& data) {
    const int view =
        add_view(data.data(), data.size() * sizeof(std::uint32_t), kElementArrayBuffer);
    accessors_.push_back({{"bufferView", view},
                          {"componentType", kUnsignedInt},
                          {"count", data.size()},
                          {"type", "SCALAR"}});
    return static_cast<int>(accessors_.size()) - 1;
  }

  int material(const Rgb& color, bool double_sided) {
    const auto key = std::make_tuple(color.r, color.g, color.b, double_sided);
    auto it = materials_index_.find(key);
    if (it != materials_index_.end()) return it->second;
    ojson m{{"name", "color_" + hex_color(color) + (double_sided ? "_2s" : "")},
            {"pbrMetallicRoughness",
             {{"baseColorFactor",
               {srgb_to_linear(color.r), srgb_to_linear(color.g), srgb_to_linear(color.b), 1.0}},
              {"metallicFactor", 0.0},
              {"roughnessFactor", 1.0}}}};
    if (double_sided) m["doubleSided"] = true;
    materials_.push_back(std::move(m));
    const int id = static_cast<int>(materials_.size()) - 1;
    materials_index_.emplace(key, id);
    return id;
  }

  int add_mesh(ojson mesh) {
    meshes_.push_back(std::move(mesh));
    return static_cast<int>(meshes_.size()) - 1;
  }

  void add_node(ojson node) { nodes_.push_back(std::move(node)); }

  bool uses_instancing = false;
  ojson scene_extras = ojson::object();

  std::vector<std::byte> finish() const {
    ojson doc;
    doc["asset"] = {{"version", "2.0"}, {"generator", "sheetscape"}};
    if (uses_instancing) doc["extensionsUsed"] = {"EXT_mesh_gpu_instancing"};
    doc["scene"] = 0;
    ojson scene{{"name", "sheet"}};
    if (!nodes_.empty()) {
      ojson ids = ojson::array();
      for (std::size_t i = 0; i < nodes_.size(); ++i) ids.push_back(i);
      scene["nodes"] = std::move(ids);
    }
    if (!scene_extras.empty()) scene["extras"] = scene_extras;
    doc["scenes"] = ojson::array({std::move(scene)});
    if (!nodes_.empty()) doc["nodes"] = nodes_;
    if (!meshes_.empty()) doc["meshes"] = meshes_;
    if (!materials_.empty()) doc["materials"] = materials_;
    if (!accessors_.empty()) doc["accessors"] = accessors_;
    if (!views_.empty()) doc["bufferViews"] = views_;
    if (!bin_.empty()) doc["buffers"] = ojson::array({{{"byteLength", bin_.size()}}});

    std::string json = doc.dump();
    while (json.size() % 4 != 0) json.push_back(' ');
    const std::size_t total =
        12 + 8 + json.size() + (bin_.empty() ? 0 : 8 + bin_.size());

    std::vector<std::byte> out;
    out.reserve(total);
    auto u32 = [&out](std::uint32_t v) {
      for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xFF));
    };
    u32(0x46546C67);  // "glTF"
    u32(2);
    u32(static_cast<std::uint32_t>(total));
    u32(static_cast<std::uint32_t>(json.size()));
    u32(0x4E4F534A);  // "JSON"
    for (char c : json) out.push_back(static_cast<std::byte>(c));
    if (!bin_.empty()) {
      u32(static_cast<std::uint32_t>(bin_.size()));
      u32(0x004E4942);  // "BIN\0"
      out.insert(out.end(), bin_.begin(), bin_.end());
    }
    return out;
  }

 private:
  int add_view(const void* data, std::size_t size, std::optional<int> target) {
    const std::size_t offset = bin_.size();
    const auto* p = static_cast<const std::byte*>(data);
    bin_.insert(bin_.end(), p, p + size);
    while (bin_.size() % 4 != 0) bin_.push_back(std::byte{0});
    ojson v{{"buffer", 0}, {"byteOffset", offset}, {"byteLength", size}};
    if (target) v["target"] = *target;
    views_.push_back(std::move(v));
    return static_cast<int>(views_.size()) - 1;
  }

  std::vector<std::byte> bin_;
  ojson views_ = ojson::array();
  ojson accessors_ = ojson::array();
  ojson materials_ = ojson::array();
  ojson meshes_ = ojson::array();
  ojson nodes_ = ojson::array();
  std::map<std::tuple<std::uint8_t, std::uint8_t, std::uint8_t, bool>, int> materials_index_;
};

struct Geometry {
  int position;
  int normal;
  int indices;
};

// Unit cube spanning x,z in [-0.5, 0.5] and y in [0, 1], four vertices per
// face so normals stay flat.
Geometry add_cube(GltfBuilder& b) {
  struct Face {
    float n[3], u[3], v[3];
  };
  static const Face faces[] = {
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},  {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},
      {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},  {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},  {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},
  };
  static const float signs[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  std::vector<Float3> pos, nrm;
  std::vector<std::uint32_t> idx;
  for (const auto& f : faces) {
    const auto base = static_cast<std::uint32_t>(pos.size());
    for (const auto& s : signs) {
      Float3 p;
      for (int k = 0; k < 3; ++k) {
        p.v[k] = 0.5f * f.n[k] + 0.5f * (s[0] * f.u[k] + s[1] * f.v[k]);
      }
      p.v[1] += 0.5f;
      pos.push_back(p);
      nrm.push_back({{f.n[0], f.n[1], f.n[2]}});
    }
    for (std::uint32_t k : {0u, 1u, 2u, 0u, 2u, 3u}) idx.push_back(base + k);
  }
  return {b.add_vec3_accessor(pos, kArrayBuffer, true),
          b.add_vec3_accessor(nrm, kArrayBuffer, false), b.add_index_accessor(idx)};
}

// Unit quad in the ground plane facing +y.
Geometry add_quad(GltfBuilder& b) {
  const std::vector<Float3> pos{{{-0.5f, 0.f, -0.5f}},
                                {{-0.5f, 0.f, 0.5f}},
                                {{0.5f, 0.f, 0.5f}},
                                {{0.5f, 0.f, -0.5f}}};
  const std::vector<Float3> nrm(4, Float3{{0.f, 1.f, 0.f}});
  return {b.add_vec3_accessor(pos, kArrayBuffer, true),
          b.add_vec3_accessor(nrm, kArrayBuffer, false),
          b.add_index_accessor({0, 1, 2, 0, 2, 3})};
}

ojson primitive(const Geometry& g, int material) {
  return {{"attributes", {{"POSITION", g.position}, {"NORMAL", g.normal}}},
          {"indices", g.indices},
          {"material", material},
          {"mode", 4}};
}

struct Bucket {
  std::vector<Float3> translation;
  std::vector<Float3> scale;
  ojson names = ojson::array();
};

using BucketKey = std::tuple<std::uint8_t, std::uint8_t, std::uint8_t>;

BucketKey key_of(const Rgb& c) { return {c.r, c.g, c.b}; }
Rgb rgb_of(const BucketKey& k) { return {std::get<0>(k), std::get<1>(k), std::get<2>(k)}; }

void emit_instanced(GltfBuilder& b, const char* kind, const Geometry& geom,
                    std::map<BucketKey, Bucket>& buckets) {
  for (auto& [key, bucket] : buckets) {
    const Rgb color = rgb_of(key);
    const int mesh = b.add_mesh(
        {{"name", std::string(kind) + "_" + hex_color(color)},
         {"primitives", ojson::array({primitive(geom, b.material(color, false))})}});
    const int t = b.add_vec3_accessor(bucket.translation, std::nullopt, false);
    const int s = b.add_vec3_accessor(bucket.scale, std::nullopt, false);
    b.add_node({{"name", std::string(kind) + "s_" + hex_color(color)},
                {"mesh", mesh},
                {"extensions",
                 {{"EXT_mesh_gpu_instancing",
                   {{"attributes", {{"TRANSLATION", t}, {"SCALE", s}}}}}}},
                {"extras", {{"instance_names", std::move(bucket.names)}}}});
    b.uses_instancing = true;
  }
}

void emit_surface(GltfBuilder& b, const SceneModel& scene) {
  const double pitch = scene.config.cell_pitch;
  std::map<BucketKey, std::vector<const Glyph*>> by_color;
  for (const auto& g : scene.glyphs) {
    if (g.kind == GlyphKind::SurfacePatch) by_color[key_of(g.color)].push_back(&g);
  }
  if (by_color.empty()) return;

  ojson primitives = ojson::array();
  ojson patch_names = ojson::array();
  for (const auto& [key, patches] : by_color) {
    std::map<CellAddress, std::uint32_t> vertex_of;
    std::vector<Float3> pos;
    std::vector<std::uint32_t> idx;
    auto vertex = [&](std::size_t row, std::size_t col, double height) {
      auto [it, fresh] = vertex_of.try_emplace({row, col}, static_cast<std::uint32_t>(pos.size()));
      if (fresh) {
        pos.push_back({{static_cast<float>(col * pitch), static_cast<float>(height),
                        static_cast<float>(row * pitch)}});
      }
      return it->second;
    };
    ojson names = ojson::array();
    for (const Glyph* g : patches) {
      const std::size_t r = g->addr.row;
      const std::size_t c = g->addr.col;
      const auto tl = vertex(r, c, g->corners[0]);
      const auto tr = vertex(r, c + 1, g->corners[1]);
      const auto bl = vertex(r + 1, c, g->corners[2]);
      const auto br = vertex(r + 1, c + 1, g->corners[3]);
      for (auto v : {tl, bl, br, tl, br, tr}) idx.push_back(v);
      patch_names.push_back(instance_name(g->addr));
    }
    const int p = b.add_vec3_accessor(pos, kArrayBuffer, true);
    const int i = b.add_index_accessor(idx);
    primitives.push_back({{"attributes", {{"POSITION", p}}},
                          {"indices", i},
                          {"material", b.material(rgb_of(key), true)},
                          {"mode", 4}});
  }
  const int mesh = b.add_mesh({{"name", "surface"}, {"primitives", std::move(primitives)}});
  b.add_node({{"name", "surface"},
              {"mesh", mesh},
              {"extras", {{"patch_names", std::move(patch_names)}}}});
}

}  // namespace

std::vector<std::byte> write_gltf(const SceneModel& scene, const GltfOptions& options) {
  std::size_t instances = 0;
  for (const auto& g : scene.glyphs) {
    if (g.kind == GlyphKind::Bar || g.kind == GlyphKind::Tile) ++instances;
  }
  if (instances > options.max_instances) {
    throw SceneTooLarge("scene has " + std::to_string(instances) + " instances, cap is " +
                        std::to_string(options.max_instances));
  }

  const double pitch = scene.config.cell_pitch;
  const auto bar_w = static_cast<float>(kBarFootprint * pitch);
  const auto tile_w = static_cast<float>(kTileFootprint * pitch);
  std::map<BucketKey, Bucket> bars, tiles;
  ojson labels = ojson::array();
  for (const auto& g : scene.glyphs) {
    const auto x = static_cast<float>(g.position.x);
    const auto z = static_cast<float>(g.position.z);
    switch (g.kind) {
      case GlyphKind::Bar: {
        auto& bucket = bars[key_of(g.color)];
        bucket.translation.push_back({{x, static_cast<float>(std::min(0.0, g.height)), z}});
        bucket.scale.push_back({{bar_w, static_cast<float>(std::fabs(g.height)), bar_w}});
        bucket.names.push_back(instance_name(g.addr));
        break;
      }
      case GlyphKind::Tile: {
        auto& bucket = tiles[key_of(g.color)];
        bucket.translation.push_back({{x, 0.f, z}});
        bucket.scale.push_back({{tile_w, 1.f, tile_w}});
        bucket.names.push_back(instance_name(g.addr));
        break;
      }
      case GlyphKind::Label:
        labels.push_back({{"name", instance_name(g.addr)},
                          {"text", g.text.value_or("")},
                          {"position", {g.position.x, g.position.y, g.position.z}}});
        break;
      case GlyphKind::SurfacePatch:
        break;
    }
  }

  GltfBuilder b;
  if (!tiles.empty()) emit_instanced(b, "tile", add_quad(b), tiles);
  if (!bars.empty()) emit_instanced(b, "bar", add_cube(b), bars);
  emit_surface(b, scene);
  if (!labels.empty()) b.scene_extras["labels"] = std::move(labels);
  return b.finish();
}

}  // namespace sheetscape
