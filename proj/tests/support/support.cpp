#include "support.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#ifndef SHEETSCAPE_FIXTURE_DIR
#error "SHEETSCAPE_FIXTURE_DIR must be defined"
#endif

namespace sheetscape::testing {

Rgb random_rgb(Rng& rng) {
  return {static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
          static_cast<std::uint8_t>(rng.index(256))};
}

CellFormat random_format(Rng& rng, const GridShape& shape) {
  CellFormat f;
  if (rng.chance(shape.p_fill)) f.fill_color = random_rgb(rng);
  if (rng.chance(shape.p_border)) {
    f.border = {rng.chance(0.5), rng.chance(0.5), rng.chance(0.5), rng.chance(0.5)};
  }
  f.font_bold = rng.chance(shape.p_bold);
  if (rng.chance(shape.p_category)) {
    static const std::vector<std::pair<FormatCategory, std::string>> formats = {
        {FormatCategory::Number, "0.00"},     {FormatCategory::Currency, "$#,##0.00"},
        {FormatCategory::Percent, "0.0%"},    {FormatCategory::Date, "yyyy-mm-dd"},
        {FormatCategory::Time, "hh:mm:ss"},   {FormatCategory::TextFmt, "@"},
    };
    const auto& [category, code] = rng.pick(formats);
    f.category = category;
    f.number_format_string = code;
  }
  return f;
}

double random_number(Rng& rng, const GridShape& shape) {
  if (rng.chance(shape.p_small_int)) return static_cast<double>(rng.between(0, 4)) - 1.0;
  switch (rng.index(4)) {
    case 0: return rng.uniform(-1000.0, 1000.0);
    case 1: return rng.uniform(0.0, 1.0);
    case 2: return std::ldexp(rng.uniform(1.0, 2.0), static_cast<int>(rng.between(0, 60)) - 30);
    default: return std::round(rng.uniform(-50.0, 50.0));
  }
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> words = {"total", "Q1", "n/a", "x", "région", "東京",
                                                 "a,b", "say \"hi\"", "two\nlines", "-"};
  return rng.pick(words);
}

CellGrid random_grid(Rng& rng, std::size_t rows, std::size_t cols, const GridShape& shape) {
  CellGrid grid(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Cell& cell = grid.at({r, c});
      const double u = rng.uniform(0.0, 1.0);
      if (u < shape.p_number) {
        cell.value = CellValue::number(random_number(rng, shape));
      } else if (u < shape.p_number + shape.p_text) {
        cell.value = CellValue::text(random_text(rng));
      }
      cell.format = random_format(rng, shape);
    }
  }
  return grid;
}

CellRange random_range(Rng& rng, const CellGrid& grid) {
  const std::size_t top = rng.index(grid.n_rows());
  const std::size_t left = rng.index(grid.n_cols());
  return {top, left, rng.between(top, grid.n_rows() - 1), rng.between(left, grid.n_cols() - 1)};
}

SceneConfig random_config(Rng& rng, GlyphMode mode) {
  SceneConfig c;
  c.glyph_mode = mode;
  c.policy.mode = rng.chance(0.5) ? NormalizationMode::Uniform : NormalizationMode::PerFormatGroup;
  c.policy.height_max = rng.pick(std::vector<double>{1.0, 2.5, 10.0, 0.3});
  c.policy.signed_baseline = rng.chance(0.3);
  c.cell_pitch = rng.pick(std::vector<double>{1.0, 0.5, 2.0, 1.25});
  if (rng.chance(0.3)) c.default_bar_color = random_rgb(rng);
  return c;
}

std::string random_edit_text(Rng& rng) {
  switch (rng.index(10)) {
    case 0: return "";
    case 1: return "  ";
    case 2: return random_text(rng);
    case 3: return std::to_string(rng.between(0, 100));
    case 4: return "1,234.5";
    case 5: return std::to_string(rng.between(0, 100)) + "%";
    case 6: return "$" + std::to_string(rng.between(0, 999));
    case 7: return "2021-03-0" + std::to_string(rng.between(1, 9));
    case 8: return "1e6";
    default: {
      std::ostringstream s;
      s.precision(17);
      s << rng.uniform(-100.0, 100.0);
      return s.str();
    }
  }
}

namespace oracle {

bool format_bearing(const CellFormat& f) {
  return f.fill_color.has_value() || f.border.left || f.border.right || f.border.top ||
         f.border.bottom || f.font_bold || f.category != FormatCategory::General ||
         f.number_format_string.has_value();
}

Counts expected_counts(const GridView& view, GlyphMode mode) {
  Counts n;
  const CellRange& r = view.range();
  for (std::size_t row = r.top; row <= r.bottom; ++row) {
    for (std::size_t col = r.left; col <= r.right; ++col) {
      const Cell& c = view.grid().at({row, col});
      const bool number = c.value.kind() == CellValue::Kind::Number;
      const bool text = c.value.kind() == CellValue::Kind::Text;
      if (mode == GlyphMode::Surface && number) continue;  // drawn by the mesh
      if (number) ++n.bars;
      if (text) ++n.labels;
      if (number || text) ++n.pickable;
      if (number || text || format_bearing(c.format)) ++n.tiles;
    }
  }
  if (mode == GlyphMode::Surface) {
    n.patches = surface_patches(view);
    n.pickable += n.patches;
  }
  return n;
}

Counts actual_counts(const SceneModel& scene) {
  Counts n;
  for (const auto& g : scene.glyphs) {
    switch (g.kind) {
      case GlyphKind::Bar: ++n.bars; break;
      case GlyphKind::Tile: ++n.tiles; break;
      case GlyphKind::Label: ++n.labels; break;
      case GlyphKind::SurfacePatch: ++n.patches; break;
    }
  }
  n.pickable = scene.pick_by_id.size();
  return n;
}

std::size_t surface_patches(const GridView& view) {
  const CellRange& r = view.range();
  auto numeric = [&](std::size_t row, std::size_t col) {
    return view.grid().at({row, col}).value.kind() == CellValue::Kind::Number;
  };
  std::size_t n = 0;
  for (std::size_t row = r.top; row < r.bottom; ++row) {
    for (std::size_t col = r.left; col < r.right; ++col) {
      if (numeric(row, col) && numeric(row, col + 1) && numeric(row + 1, col) &&
          numeric(row + 1, col + 1)) {
        ++n;
      }
    }
  }
  return n;
}

Heights normalize(const std::vector<double>& values, const std::vector<FormatCategory>& categories,
                  const NormalizationPolicy& policy) {
  const bool per_format = policy.mode == NormalizationMode::PerFormatGroup;
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < values.size(); ++i) {
    members[per_format ? static_cast<int>(categories[i]) : 0].push_back(i);
  }
  Heights out;
  out.heights.assign(values.size(), 0.0);
  out.group_of.assign(values.size(), 0);
  std::size_t g = 0;
  for (const auto& [key, idx] : members) {
    double lo = values[idx.front()];
    double hi = lo;
    for (auto i : idx) {
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
    for (auto i : idx) {
      double h;
      if (lo == hi) {
        h = policy.height_max / 2;
      } else if (policy.signed_baseline && lo < 0 && hi > 0) {
        h = policy.height_max * values[i] / std::max(-lo, hi);
      } else {
        h = policy.height_max * (values[i] - lo) / (hi - lo);
      }
      out.heights[i] = h;
      out.group_of[i] = g;
    }
    ++g;
  }
  return out;
}

namespace {

double sorted_median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

double score(const Center& c, double v) {
  return c.scale > 0.0 ? std::fabs(v - c.median) / c.scale : 0.0;
}

}  // namespace

Center robust_center(const std::vector<double>& xs) {
  Center c;
  c.median = sorted_median(xs);
  std::vector<double> dev;
  for (double x : xs) dev.push_back(std::fabs(x - c.median));
  double sum = 0.0;
  for (double d : dev) sum += d;
  const double largest = *std::max_element(dev.begin(), dev.end());
  const double floor = kRelativeSpreadFloor * std::max(std::fabs(c.median), largest);
  const double mad = sorted_median(dev);
  if (mad > floor) {
    c.scale = 1.4826 * mad;
  } else if (sum / static_cast<double>(xs.size()) > floor) {
    c.scale = 1.253314 * (sum / static_cast<double>(xs.size()));
  }
  return c;
}

std::vector<double> robust_z(const std::vector<double>& xs) {
  const Center c = robust_center(xs);
  std::vector<double> z;
  for (double x : xs) z.push_back(score(c, x));
  return z;
}

std::vector<Flag> detect(const std::vector<Point>& s, const DetectorParams& p) {
  const std::size_t n = s.size();
  std::vector<Flag> flags;
  auto num = [&](std::size_t i) { return s[i].kind == Point::Num; };

  // Fins: every window scanned from scratch.
  for (std::size_t i = 0; i < n; ++i) {
    if (!num(i)) continue;
    const std::size_t lo = i < p.window_radius ? 0 : i - p.window_radius;
    const std::size_t hi = std::min(n - 1, i + p.window_radius);
    std::vector<double> w;
    for (std::size_t k = lo; k <= hi; ++k) {
      if (num(k)) w.push_back(s[k].v);
    }
    if (w.size() < 3) continue;
    const Center c = robust_center(w);
    const double z = score(c, s[i].v);
    if (z < p.z_threshold) continue;
    bool isolated = true;
    if (i > lo && num(i - 1) && score(c, s[i - 1].v) >= p.z_threshold) isolated = false;
    if (i < hi && num(i + 1) && score(c, s[i + 1].v) >= p.z_threshold) isolated = false;
    if (isolated) flags.push_back({i, Detector::Fin, z});
  }

  // Runs: a run starts wherever the previous position differs.
  std::set<double> distinct;
  for (const auto& pt : s) {
    if (pt.kind == Point::Num) distinct.insert(pt.v);
  }
  if (distinct.size() >= 2) {
    auto same = [&](std::size_t a, std::size_t b) {
      if (s[a].kind != s[b].kind || s[a].kind == Point::Txt) return false;
      return s[a].kind == Point::Emp || s[a].v == s[b].v;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i].kind == Point::Txt || (i > 0 && same(i - 1, i))) continue;
      std::size_t len = 1;
      while (i + len < n && same(i, i + len)) ++len;
      if (len >= p.tab_min_run) {
        flags.push_back({i, s[i].kind == Point::Emp ? Detector::Missing : Detector::Tab,
                         static_cast<double>(len)});
      }
    }
  }

  // Jumps between adjacent numeric cells.
  if (n >= 4) {
    std::vector<double> d;
    std::vector<std::size_t> at;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (num(i) && num(i + 1)) {
        d.push_back(s[i + 1].v - s[i].v);
        at.push_back(i);
      }
    }
    if (d.size() >= 3) {
      const auto z = robust_z(d);
      for (std::size_t k = 0; k < z.size(); ++k) {
        if (z[k] >= p.z_threshold) flags.push_back({at[k], Detector::Discontinuity, z[k]});
      }
    }
  }

  std::sort(flags.begin(), flags.end(), [](const Flag& a, const Flag& b) {
    if (a.detector != b.detector) return a.detector < b.detector;
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  return flags;
}

}  // namespace oracle

std::optional<std::string> scene_difference(const SceneModel& a, const SceneModel& b, double tol) {
  auto near = [tol](double x, double y) { return std::fabs(x - y) <= tol; };
  if (!(a.config == b.config)) return "config differs";
  if (!(a.range == b.range)) return "range differs";
  if (a.glyphs.size() != b.glyphs.size()) {
    return "glyph count " + std::to_string(a.glyphs.size()) + " vs " +
           std::to_string(b.glyphs.size());
  }
  for (std::size_t i = 0; i < a.glyphs.size(); ++i) {
    const Glyph& x = a.glyphs[i];
    const Glyph& y = b.glyphs[i];
    const std::string where = "glyph " + std::to_string(i) + " at " + to_string(x.addr) + ": ";
    if (x.id != y.id || x.kind != y.kind || x.addr != y.addr) return where + "identity differs";
    if (!(x.position == y.position)) return where + "position differs";
    if (!near(x.height, y.height)) return where + "height differs";
    for (std::size_t k = 0; k < 4; ++k) {
      if (!near(x.corners[k], y.corners[k])) return where + "corner differs";
    }
    if (!(x.color == y.color)) return where + "color differs";
    if (x.text != y.text) return where + "text differs";
    if (!(x.border == y.border)) return where + "border differs";
  }
  if (a.pick_by_id != b.pick_by_id || a.pick_by_addr != b.pick_by_addr) return "pick map differs";
  const auto& ga = a.policy_echo.groups;
  const auto& gb = b.policy_echo.groups;
  if (!(a.policy_echo.policy == b.policy_echo.policy) || ga.size() != gb.size()) {
    return "policy echo differs";
  }
  for (std::size_t i = 0; i < ga.size(); ++i) {
    if (ga[i].category != gb[i].category || ga[i].count != gb[i].count ||
        !near(ga[i].v_min, gb[i].v_min) || !near(ga[i].v_max, gb[i].v_max)) {
      return "group " + std::to_string(i) + " differs";
    }
  }
  const Bounds& p = a.bounds;
  const Bounds& q = b.bounds;
  if (!near(p.min.x, q.min.x) || !near(p.min.y, q.min.y) || !near(p.min.z, q.min.z) ||
      !near(p.max.x, q.max.x) || !near(p.max.y, q.max.y) || !near(p.max.z, q.max.z)) {
    return "bounds differ";
  }
  return std::nullopt;
}

std::filesystem::path fixture_path(std::string_view name) {
  return std::filesystem::path(SHEETSCAPE_FIXTURE_DIR) / name;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::byte> to_bytes(std::string_view s) {
  std::vector<std::byte> out(s.size());
  std::memcpy(out.data(), s.data(), s.size());
  return out;
}

std::vector<std::byte> read_bytes(const std::filesystem::path& p) { return to_bytes(read_text(p)); }

TempDir::TempDir() {
  std::random_device rd;
  for (;;) {
    path_ = std::filesystem::temp_directory_path() /
            ("sheetscape-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (std::filesystem::create_directory(path_)) return;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

void put16(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, v & 0xFFFF);
  put16(out, v >> 16);
}

std::string raw_deflate(const std::string& data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, data.size()), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
  out.resize(zs.total_out);
  return out;
}

}  // namespace

std::vector<std::byte> make_zip(const std::vector<ZipEntry>& entries) {
  std::string out;
  std::string central;
  for (const auto& e : entries) {
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(e.data.data()), static_cast<uInt>(e.data.size())));
    const std::string body = e.deflate ? raw_deflate(e.data) : e.data;
    const auto offset = static_cast<std::uint32_t>(out.size());
    const std::uint32_t method = e.deflate ? 8 : 0;

    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0);
    put16(out, method);
    put16(out, 0);
    put16(out, 0x21);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(body.size()));
    put32(out, static_cast<std::uint32_t>(e.data.size()));
    put16(out, static_cast<std::uint32_t>(e.name.size()));
    put16(out, 0);
    out += e.name;
    out += body;

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, method);
    put16(central, 0);
    put16(central, 0x21);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(body.size()));
    put32(central, static_cast<std::uint32_t>(e.data.size()));
    put16(central, static_cast<std::uint32_t>(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += e.name;
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint32_t>(entries.size()));
  put16(out, static_cast<std::uint32_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return to_bytes(out);
}

std::vector<ZipEntry> workbook_parts(const std::string& sheet_data, const std::string& styles,
                                     const std::string& shared_strings, const std::string& sheet) {
  const std::string ns = "http://schemas.openxmlformats.org/spreadsheetml/2006/main";
  const std::string rel = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
  std::vector<ZipEntry> parts;
  parts.push_back({"[Content_Types].xml",
                   "<?xml version=\"1.0\"?><Types "
                   "xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\"/>"});
  parts.push_back({"_rels/.rels",
                   "<?xml version=\"1.0\"?><Relationships "
                   "xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
                   "<Relationship Id=\"rId1\" Type=\"" + rel + "/officeDocument\" "
                   "Target=\"xl/workbook.xml\"/></Relationships>"});
  parts.push_back({"xl/workbook.xml",
                   "<?xml version=\"1.0\"?><workbook xmlns=\"" + ns + "\" xmlns:r=\"" + rel +
                       "\"><sheets><sheet name=\"" + sheet +
                       "\" sheetId=\"1\" r:id=\"rId1\"/></sheets></workbook>"});
  std::string rels =
      "<?xml version=\"1.0\"?><Relationships "
      "xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
      "<Relationship Id=\"rId1\" Type=\"" + rel + "/worksheet\" Target=\"worksheets/sheet1.xml\"/>";
  if (!styles.empty()) {
    rels += "<Relationship Id=\"rId2\" Type=\"" + rel + "/styles\" Target=\"styles.xml\"/>";
    parts.push_back({"xl/styles.xml",
                     "<?xml version=\"1.0\"?><styleSheet xmlns=\"" + ns + "\">" + styles +
                         "</styleSheet>"});
  }
  if (!shared_strings.empty()) {
    rels += "<Relationship Id=\"rId3\" Type=\"" + rel +
            "/sharedStrings\" Target=\"sharedStrings.xml\"/>";
    parts.push_back({"xl/sharedStrings.xml",
                     "<?xml version=\"1.0\"?><sst xmlns=\"" + ns + "\">" + shared_strings +
                         "</sst>"});
  }
  rels += "</Relationships>";
  parts.push_back({"xl/_rels/workbook.xml.rels", rels});
  parts.push_back({"xl/worksheets/sheet1.xml",
                   "<?xml version=\"1.0\"?><worksheet xmlns=\"" + ns + "\"><sheetData>" +
                       sheet_data + "</sheetData></worksheet>"});
  return parts;
}

}  // namespace sheetscape::testing
