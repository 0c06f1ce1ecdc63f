#include "glb.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <set>
#include <sys/wait.h>

namespace sheetscape::testing {

namespace {

using nlohmann::json;

std::uint32_t u32(std::span<const std::byte> b, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + at, 4);
  return v;
}

std::size_t component_size(int type) {
  switch (type) {
    case 5120: case 5121: return 1;
    case 5122: case 5123: return 2;
    case 5125: case 5126: return 4;
    default: return 0;
  }
}

std::size_t component_count(const std::string& type) {
  if (type == "SCALAR") return 1;
  if (type == "VEC2") return 2;
  if (type == "VEC3") return 3;
  if (type == "VEC4") return 4;
  if (type == "MAT4") return 16;
  return 0;
}

bool valid_index(const json& arr, const json& v) {
  return v.is_number_unsigned() && v.get<std::size_t>() < arr.size();
}

// Byte offset into bin of accessor element 0 and the stride, or false.
bool locate(const GlbAsset& a, std::size_t accessor, std::size_t& start, std::size_t& stride) {
  const json& acc = a.doc["accessors"][accessor];
  const json& view = a.doc["bufferViews"][acc["bufferView"].get<std::size_t>()];
  start = view.value("byteOffset", std::size_t{0}) + acc.value("byteOffset", std::size_t{0});
  const std::size_t elem = component_size(acc["componentType"].get<int>()) *
                           component_count(acc["type"].get<std::string>());
  stride = view.value("byteStride", elem);
  return true;
}

void check(GlbAsset& a) {
  auto fail = [&a](std::string msg) { a.problems.push_back(std::move(msg)); };
  const json& d = a.doc;
  if (!d.contains("asset") || d["asset"].value("version", "") != "2.0") fail("asset.version");

  const json empty = json::array();
  const json& buffers = d.value("buffers", empty);
  const json& views = d.contains("bufferViews") ? d["bufferViews"] : empty;
  const json& accessors = d.contains("accessors") ? d["accessors"] : empty;
  const json& meshes = d.contains("meshes") ? d["meshes"] : empty;
  const json& nodes = d.contains("nodes") ? d["nodes"] : empty;
  const json& materials = d.contains("materials") ? d["materials"] : empty;

  if (buffers.size() > 1) fail("more than one buffer");
  if (buffers.size() == 1) {
    const auto len = buffers[0].value("byteLength", std::size_t{0});
    if (buffers[0].contains("uri")) fail("GLB buffer 0 has a uri");
    if (len > a.bin.size()) fail("buffer longer than BIN chunk");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const json& v = views[i];
    if (!valid_index(buffers, v.value("buffer", json()))) {
      fail("bufferView " + std::to_string(i) + " buffer");
      continue;
    }
    const auto end = v.value("byteOffset", std::size_t{0}) + v.value("byteLength", std::size_t{0});
    if (end > buffers[0].value("byteLength", std::size_t{0})) {
      fail("bufferView " + std::to_string(i) + " overruns buffer");
    }
  }
  for (std::size_t i = 0; i < accessors.size(); ++i) {
    const json& acc = accessors[i];
    const std::string tag = "accessor " + std::to_string(i);
    const std::size_t csize = component_size(acc.value("componentType", 0));
    const std::size_t ccount = component_count(acc.value("type", ""));
    const auto count = acc.value("count", std::size_t{0});
    if (!csize || !ccount) fail(tag + " type");
    if (count == 0) fail(tag + " count is zero");
    if (!valid_index(views, acc.value("bufferView", json()))) {
      fail(tag + " bufferView");
      continue;
    }
    const json& view = views[acc["bufferView"].get<std::size_t>()];
    const std::size_t elem = csize * ccount;
    const std::size_t stride = view.value("byteStride", elem);
    const std::size_t off = acc.value("byteOffset", std::size_t{0});
    if (elem && (off % csize != 0)) fail(tag + " misaligned");
    if (count && off + (count - 1) * stride + elem > view.value("byteLength", std::size_t{0})) {
      fail(tag + " overruns its bufferView");
    }
    if (acc.contains("min") != acc.contains("max")) fail(tag + " min without max");
    if (acc.contains("min") && acc["min"].size() != ccount) fail(tag + " min arity");
  }

  auto vec3_float = [&](std::size_t i) {
    return accessors[i].value("type", "") == "VEC3" && accessors[i].value("componentType", 0) == 5126;
  };
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const std::string tag = "mesh " + std::to_string(m);
    if (!meshes[m].contains("primitives") || meshes[m]["primitives"].empty()) {
      fail(tag + " has no primitives");
      continue;
    }
    for (const json& prim : meshes[m]["primitives"]) {
      const json& attrs = prim.value("attributes", json::object());
      if (!attrs.contains("POSITION") || !valid_index(accessors, attrs["POSITION"])) {
        fail(tag + " POSITION");
        continue;
      }
      const auto pos = attrs["POSITION"].get<std::size_t>();
      if (!vec3_float(pos)) fail(tag + " POSITION type");
      if (!accessors[pos].contains("min")) fail(tag + " POSITION lacks min/max");
      const auto vertices = accessors[pos].value("count", std::size_t{0});
      for (const auto& [name, idx] : attrs.items()) {
        if (!valid_index(accessors, idx)) {
          fail(tag + " attribute " + name);
        } else if (accessors[idx.get<std::size_t>()].value("count", std::size_t{0}) != vertices) {
          fail(tag + " attribute " + name + " count");
        }
      }
      if (prim.contains("material") && !valid_index(materials, prim["material"])) {
        fail(tag + " material");
      }
      if (prim.contains("indices")) {
        if (!valid_index(accessors, prim["indices"])) {
          fail(tag + " indices");
          continue;
        }
        const auto ia = prim["indices"].get<std::size_t>();
        if (accessors[ia].value("componentType", 0) != 5125) continue;
        const auto idx = a.read_indices(ia);
        if (idx.size() % 3 != 0) fail(tag + " index count not a multiple of 3");
        for (auto v : idx) {
          if (v >= vertices) {
            fail(tag + " index out of range");
            break;
          }
        }
      }
    }
  }
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const json& node = nodes[n];
    const std::string tag = "node " + std::to_string(n);
    if (node.contains("mesh") && !valid_index(meshes, node["mesh"])) fail(tag + " mesh");
    if (!node.contains("extensions") || !node["extensions"].contains("EXT_mesh_gpu_instancing")) {
      continue;
    }
    const json& attrs = node["extensions"]["EXT_mesh_gpu_instancing"]["attributes"];
    std::set<std::size_t> counts;
    for (const auto& [name, idx] : attrs.items()) {
      if (!valid_index(accessors, idx)) {
        fail(tag + " instancing " + name);
        continue;
      }
      counts.insert(accessors[idx.get<std::size_t>()].value("count", std::size_t{0}));
      if (accessors[idx.get<std::size_t>()].contains("bufferView") &&
          views[accessors[idx.get<std::size_t>()]["bufferView"].get<std::size_t>()].contains(
              "target")) {
        fail(tag + " instancing bufferView has a target");
      }
    }
    if (counts.size() != 1) fail(tag + " instancing attribute counts differ");
    const json extras = node.value("extras", json::object());
    if (counts.size() == 1 && extras.contains("instance_names") &&
        extras["instance_names"].size() != *counts.begin()) {
      fail(tag + " instance_names length");
    }
  }
  if (d.contains("scenes")) {
    for (const json& s : d["scenes"]) {
      for (const json& n : s.value("nodes", json::array())) {
        if (!valid_index(nodes, n)) fail("scene node reference");
      }
    }
  }
  for (const json& ext : d.value("extensionsRequired", json::array())) {
    bool used = false;
    for (const json& u : d.value("extensionsUsed", json::array())) used |= u == ext;
    if (!used) fail("required extension not in extensionsUsed");
  }
}

}  // namespace

GlbAsset inspect_glb(std::span<const std::byte> b) {
  GlbAsset a;
  if (b.size() < 20) {
    a.problems.push_back("too short");
    return a;
  }
  if (u32(b, 0) != 0x46546C67) a.problems.push_back("magic");
  if (u32(b, 4) != 2) a.problems.push_back("version");
  if (u32(b, 8) != b.size()) a.problems.push_back("declared length differs");
  if (b.size() % 4 != 0) a.problems.push_back("length not 4-aligned");
  const std::size_t json_len = u32(b, 12);
  if (u32(b, 16) != 0x4E4F534A || 20 + json_len > b.size() || json_len % 4 != 0) {
    a.problems.push_back("JSON chunk header");
    return a;
  }
  try {
    a.doc = nlohmann::json::parse(reinterpret_cast<const char*>(b.data()) + 20,
                                  reinterpret_cast<const char*>(b.data()) + 20 + json_len);
  } catch (const std::exception& e) {
    a.problems.push_back(std::string("JSON chunk: ") + e.what());
    return a;
  }
  std::size_t at = 20 + json_len;
  if (at < b.size()) {
    if (at + 8 > b.size()) {
      a.problems.push_back("BIN chunk header");
      return a;
    }
    const std::size_t bin_len = u32(b, at);
    if (u32(b, at + 4) != 0x004E4942 || at + 8 + bin_len > b.size() || bin_len % 4 != 0) {
      a.problems.push_back("BIN chunk header");
      return a;
    }
    a.bin.assign(b.begin() + static_cast<std::ptrdiff_t>(at + 8),
                 b.begin() + static_cast<std::ptrdiff_t>(at + 8 + bin_len));
    at += 8 + bin_len;
  }
  if (at != b.size()) a.problems.push_back("trailing bytes");
  try {
    check(a);
  } catch (const std::exception& e) {
    a.problems.push_back(std::string("structure: ") + e.what());
  }
  return a;
}

std::size_t GlbAsset::instance_count(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& node : doc.value("nodes", nlohmann::json::array())) {
    if (node.value("name", "").rfind(prefix, 0) != 0 || !node.contains("extensions")) continue;
    const auto& attrs = node["extensions"]["EXT_mesh_gpu_instancing"]["attributes"];
    n += doc["accessors"][attrs["TRANSLATION"].get<std::size_t>()]["count"].get<std::size_t>();
  }
  return n;
}

std::vector<std::string> GlbAsset::instance_names(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& node : doc.value("nodes", nlohmann::json::array())) {
    if (node.value("name", "").rfind(prefix, 0) != 0) continue;
    for (const auto& n : node["extras"]["instance_names"]) out.push_back(n.get<std::string>());
  }
  return out;
}

std::vector<float> GlbAsset::read_floats(std::size_t accessor) const {
  std::size_t start = 0, stride = 0;
  locate(*this, accessor, start, stride);
  const auto& acc = doc["accessors"][accessor];
  const std::size_t comps = component_count(acc["type"].get<std::string>());
  std::vector<float> out;
  for (std::size_t i = 0; i < acc["count"].get<std::size_t>(); ++i) {
    for (std::size_t k = 0; k < comps; ++k) {
      float f;
      std::memcpy(&f, bin.data() + start + i * stride + 4 * k, 4);
      out.push_back(f);
    }
  }
  return out;
}

std::vector<std::uint32_t> GlbAsset::read_indices(std::size_t accessor) const {
  std::size_t start = 0, stride = 0;
  locate(*this, accessor, start, stride);
  const auto& acc = doc["accessors"][accessor];
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < acc["count"].get<std::size_t>(); ++i) {
    std::uint32_t v;
    std::memcpy(&v, bin.data() + start + i * stride, 4);
    out.push_back(v);
  }
  return out;
}

int run_gltf_validator(const std::filesystem::path& glb, std::string* output) {
#ifdef SHEETSCAPE_GLTF_VALIDATOR
  const std::string cmd = std::string(SHEETSCAPE_NODE) + " \"" + SHEETSCAPE_GLTF_VALIDATOR +
                          "\" \"" + glb.string() + "\" 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::array<char, 4096> buf{};
  std::string text;
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) text += buf.data();
  const int status = pclose(pipe);
  if (output) *output = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  (void)glb;
  if (output) output->clear();
  return -1;
#endif
}

}  // namespace sheetscape::testing
