// Office Open XML (.xlsx) ingest. Reads the subset the scene needs: values,
// shared strings, solid fills, border presence, bold, number formats and the
// used range. Parts are discovered through the package relationship files.

#include "ingest/xml_document.hpp"
#include "ingest/zip_archive.hpp"
#include "sheetscape/errors.hpp"
#include "sheetscape/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <unordered_map>

namespace sheetscape {

namespace {

using detail::XmlElement;
using detail::ZipArchive;

constexpr std::string_view kRelOfficeDocument = "/officeDocument";
constexpr std::string_view kRelSharedStrings = "/sharedStrings";
constexpr std::string_view kRelStyles = "/styles";

// Default Office theme, in the order fill/font "theme" indices use
// (light and dark pairs are swapped relative to the clrScheme order).
constexpr std::array<std::uint32_t, 12> kThemePalette = {
    0xFFFFFF, 0x000000, 0xE7E6E6, 0x44546A, 0x4472C4, 0xED7D31,
    0xA5A5A5, 0xFFC000, 0x5B9BD5, 0x70AD47, 0x0563C1, 0x954F72};

constexpr std::array<std::uint32_t, 64> kLegacyIndexedPalette = {
    0x000000, 0xFFFFFF, 0xFF0000, 0x00FF00, 0x0000FF, 0xFFFF00, 0xFF00FF, 0x00FFFF,
    0x000000, 0xFFFFFF, 0xFF0000, 0x00FF00, 0x0000FF, 0xFFFF00, 0xFF00FF, 0x00FFFF,
    0x800000, 0x008000, 0x000080, 0x808000, 0x800080, 0x008080, 0xC0C0C0, 0x808080,
    0x9999FF, 0x993366, 0xFFFFCC, 0xCCFFFF, 0x660066, 0xFF8080, 0x0066CC, 0xCCCCFF,
    0x000080, 0xFF00FF, 0xFFFF00, 0x00FFFF, 0x800080, 0x800000, 0x008080, 0x0000FF,
    0x00CCFF, 0xCCFFFF, 0xCCFFCC, 0xFFFF99, 0x99CCFF, 0xFF99CC, 0xCC99FF, 0xFFCC99,
    0x3366FF, 0x33CCCC, 0x99CC00, 0xFFCC00, 0xFF9900, 0xFF6600, 0x666699, 0x969696,
    0x003366, 0x339966, 0x003300, 0x333300, 0x993300, 0x993366, 0x333399, 0x333333};

// Built-in number formats that have a fixed code in every locale. Ids 5-8 and
// 37-40 are locale currency/accounting formats; the en-US codes are used.
const std::map<int, std::string_view>& builtin_formats() {
  static const std::map<int, std::string_view> table = {
      {0, "General"},
      {1, "0"},
      {2, "0.00"},
      {3, "#,##0"},
      {4, "#,##0.00"},
      {5, "\"$\"#,##0_);\\(\"$\"#,##0\\)"},
      {6, "\"$\"#,##0_);[Red]\\(\"$\"#,##0\\)"},
      {7, "\"$\"#,##0.00_);\\(\"$\"#,##0.00\\)"},
      {8, "\"$\"#,##0.00_);[Red]\\(\"$\"#,##0.00\\)"},
      {9, "0%"},
      {10, "0.00%"},
      {11, "0.00E+00"},
      {12, "# ?/?"},
      {13, "# ?\?/?\?"},
      {14, "mm-dd-yy"},
      {15, "d-mmm-yy"},
      {16, "d-mmm"},
      {17, "mmm-yy"},
      {18, "h:mm AM/PM"},
      {19, "h:mm:ss AM/PM"},
      {20, "h:mm"},
      {21, "h:mm:ss"},
      {22, "m/d/yy h:mm"},
      {37, "#,##0 ;(#,##0)"},
      {38, "#,##0 ;[Red](#,##0)"},
      {39, "#,##0.00;(#,##0.00)"},
      {40, "#,##0.00;[Red](#,##0.00)"},
      {45, "mm:ss"},
      {46, "[h]:mm:ss"},
      {47, "mmss.0"},
      {48, "##0.0E+0"},
      {49, "@"},
  };
  return table;
}

std::optional<long> to_long(std::string_view s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool truthy(const std::string* v) {
  return v && (*v == "1" || *v == "true");
}

std::string directory_of(const std::string& part) {
  const auto slash = part.rfind('/');
  return slash == std::string::npos ? std::string{} : part.substr(0, slash + 1);
}

// Resolves a relationship target against the directory of its source part.
std::string resolve_target(const std::string& base_dir, const std::string& target) {
  std::vector<std::string> segments;
  std::string path = target.starts_with("/") ? target.substr(1) : base_dir + target;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const std::string seg =
        path.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
    } else if (!seg.empty() && seg != ".") {
      segments.push_back(seg);
    }
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out.push_back('/');
    out += segments[i];
  }
  return out;
}

std::string rels_part_for(const std::string& part) {
  const auto slash = part.rfind('/');
  const std::string dir = slash == std::string::npos ? "" : part.substr(0, slash + 1);
  const std::string file = slash == std::string::npos ? part : part.substr(slash + 1);
  return dir + "_rels/" + file + ".rels";
}

struct Relationship {
  std::string id;
  std::string type;
  std::string target;  // resolved part name
};

class Package {
 public:
  explicit Package(std::span<const std::byte> bytes) : zip_(bytes) {}

  std::unique_ptr<XmlElement> load(const std::string& part) const {
    auto data = zip_.read(part);
    if (!data) throw MalformedPart(part, "part is missing from the package");
    return detail::parse_xml(*data, part);
  }

  std::vector<Relationship> relationships(const std::string& source_part) const {
    const std::string rels = source_part.empty() ? "_rels/.rels" : rels_part_for(source_part);
    auto root = load(rels);
    std::vector<Relationship> out;
    const std::string base = directory_of(source_part);
    root->for_each_child("Relationship", [&](const XmlElement& r) {
      if (r.attr_or("TargetMode", "") == "External") return;
      const auto* target = r.attr("Target");
      if (!target) throw MalformedPart(rels, "relationship without Target");
      out.push_back({r.attr_or("Id", ""), r.attr_or("Type", ""),
                     resolve_target(base, *target)});
    });
    return out;
  }

 private:
  ZipArchive zip_;
};

const Relationship* find_by_type(const std::vector<Relationship>& rels,
                                 std::string_view type_suffix) {
  for (const auto& r : rels) {
    if (r.type.ends_with(type_suffix)) return &r;
  }
  return nullptr;
}

// ---- styles ---------------------------------------------------------------

Rgb rgb_from(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 16 & 0xFF),
          static_cast<std::uint8_t>(v >> 8 & 0xFF),
          static_cast<std::uint8_t>(v & 0xFF)};
}

// Lightens (tint > 0) or darkens (tint < 0) in HLS space the way spreadsheet
// themes define tints.
Rgb apply_tint(Rgb c, double tint) {
  if (tint == 0.0) return c;
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  double h = 0.0, s = 0.0;
  double l = (mx + mn) / 2.0;
  if (mx != mn) {
    const double d = mx - mn;
    s = l <= 0.5 ? d / (mx + mn) : d / (2.0 - mx - mn);
    const double rc = (mx - r) / d, gc = (mx - g) / d, bc = (mx - b) / d;
    if (r == mx) {
      h = bc - gc;
    } else if (g == mx) {
      h = 2.0 + rc - bc;
    } else {
      h = 4.0 + gc - rc;
    }
    h = std::fmod(h / 6.0, 1.0);
    if (h < 0) h += 1.0;
  }
  l = tint < 0 ? l * (1.0 + tint) : l * (1.0 - tint) + tint;
  auto hue = [](double m1, double m2, double hh) {
    hh = std::fmod(hh, 1.0);
    if (hh < 0) hh += 1.0;
    if (hh < 1.0 / 6.0) return m1 + (m2 - m1) * hh * 6.0;
    if (hh < 0.5) return m2;
    if (hh < 2.0 / 3.0) return m1 + (m2 - m1) * (2.0 / 3.0 - hh) * 6.0;
    return m1;
  };
  double r2 = l, g2 = l, b2 = l;
  if (s != 0.0) {
    const double m2 = l <= 0.5 ? l * (1.0 + s) : l + s - l * s;
    const double m1 = 2.0 * l - m2;
    r2 = hue(m1, m2, h + 1.0 / 3.0);
    g2 = hue(m1, m2, h);
    b2 = hue(m1, m2, h - 1.0 / 3.0);
  }
  auto to_byte = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
  };
  return {to_byte(r2), to_byte(g2), to_byte(b2)};
}

struct Palette {
  std::vector<std::uint32_t> indexed;

  std::optional<Rgb> resolve(const XmlElement* color) const {
    if (!color) return std::nullopt;
    if (truthy(color->attr("auto"))) return std::nullopt;
    std::optional<Rgb> base;
    if (const auto* rgb = color->attr("rgb")) {
      std::string_view hex = *rgb;
      if (hex.size() == 8) hex.remove_prefix(2);  // alpha is ignored
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
      if (hex.size() == 6 && ec == std::errc() && ptr == hex.data() + hex.size()) {
        base = rgb_from(v);
      }
    } else if (const auto* theme = color->attr("theme")) {
      if (auto t = to_long(*theme); t && *t >= 0 &&
                                    *t < static_cast<long>(kThemePalette.size())) {
        base = rgb_from(kThemePalette[static_cast<std::size_t>(*t)]);
      }
    } else if (const auto* idx = color->attr("indexed")) {
      if (auto i = to_long(*idx)) {
        if (*i >= 0 && *i < static_cast<long>(indexed.size())) {
          base = rgb_from(indexed[static_cast<std::size_t>(*i)]);
        } else if (*i == 64) {
          base = Rgb{0, 0, 0};  // system foreground
        } else if (*i == 65) {
          base = Rgb{255, 255, 255};  // system background
        }
      }
    }
    if (base) {
      if (const auto* tint = color->attr("tint")) {
        double t = 0.0;
        std::from_chars(tint->data(), tint->data() + tint->size(), t);
        base = apply_tint(*base, std::clamp(t, -1.0, 1.0));
      }
    }
    return base;
  }
};

struct StyleTable {
  std::vector<CellFormat> xfs;

  const CellFormat& lookup(std::size_t index) const {
    static const CellFormat kDefault;
    return index < xfs.size() ? xfs[index] : kDefault;
  }
};

StyleTable read_styles(const XmlElement& root) {
  Palette palette;
  palette.indexed.assign(kLegacyIndexedPalette.begin(), kLegacyIndexedPalette.end());
  if (const auto* colors = root.child("colors")) {
    if (const auto* idx = colors->child("indexedColors")) {
      std::vector<std::uint32_t> custom;
      idx->for_each_child("rgbColor", [&](const XmlElement& c) {
        std::string_view hex = c.attr_or("rgb", "FF000000");
        if (hex.size() == 8) hex.remove_prefix(2);
        std::uint32_t v = 0;
        std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
        custom.push_back(v);
      });
      if (!custom.empty()) palette.indexed = std::move(custom);
    }
  }

  std::unordered_map<long, std::string> num_fmts;
  for (const auto& [id, code] : builtin_formats()) num_fmts[id] = std::string(code);
  if (const auto* fmts = root.child("numFmts")) {
    fmts->for_each_child("numFmt", [&](const XmlElement& f) {
      if (auto id = to_long(f.attr_or("numFmtId", ""))) {
        num_fmts[*id] = f.attr_or("formatCode", "General");
      }
    });
  }

  std::vector<bool> bold;
  if (const auto* fonts = root.child("fonts")) {
    fonts->for_each_child("font", [&](const XmlElement& f) {
      const auto* b = f.child("b");
      bool is_bold = b != nullptr;
      if (b) {
        if (const auto* val = b->attr("val")) is_bold = *val == "1" || *val == "true";
      }
      bold.push_back(is_bold);
    });
  }

  std::vector<std::optional<Rgb>> fills;
  if (const auto* fs = root.child("fills")) {
    fs->for_each_child("fill", [&](const XmlElement& f) {
      std::optional<Rgb> color;
      if (const auto* pf = f.child("patternFill")) {
        if (pf->attr_or("patternType", "none") == "solid") {
          color = palette.resolve(pf->child("fgColor"));
          if (!color) color = palette.resolve(pf->child("bgColor"));
        }
      }
      fills.push_back(color);
    });
  }

  std::vector<BorderFlags> borders;
  if (const auto* bs = root.child("borders")) {
    bs->for_each_child("border", [&](const XmlElement& b) {
      auto edge = [&](std::string_view a, std::string_view alt) {
        const XmlElement* e = b.child(a);
        if (!e) e = b.child(alt);
        if (!e) return false;
        const std::string style = e->attr_or("style", "none");
        return style != "none";
      };
      BorderFlags flags;
      flags.left = edge("left", "start");
      flags.right = edge("right", "end");
      flags.top = edge("top", "top");
      flags.bottom = edge("bottom", "bottom");
      borders.push_back(flags);
    });
  }

  StyleTable table;
  if (const auto* xfs = root.child("cellXfs")) {
    xfs->for_each_child("xf", [&](const XmlElement& xf) {
      auto index = [&](std::string_view key) -> std::size_t {
        auto v = to_long(xf.attr_or(key, "0"));
        return v && *v >= 0 ? static_cast<std::size_t>(*v) : 0;
      };
      CellFormat fmt;
      const std::size_t font = index("fontId");
      const std::size_t fill = index("fillId");
      const std::size_t border = index("borderId");
      if (font < bold.size()) fmt.font_bold = bold[font];
      if (fill < fills.size()) fmt.fill_color = fills[fill];
      if (border < borders.size()) fmt.border = borders[border];
      const long num_fmt_id = static_cast<long>(index("numFmtId"));
      if (num_fmt_id != 0) {
        auto it = num_fmts.find(num_fmt_id);
        const std::string code = it == num_fmts.end() ? "General" : it->second;
        fmt.category = infer_format_category(code);
        if (code != "General") fmt.number_format_string = code;
      }
      table.xfs.push_back(std::move(fmt));
    });
  }
  return table;
}

// ---- shared strings -------------------------------------------------------

// Text of a string item: plain <t>, or the concatenated runs of rich text.
// Phonetic hints (<rPh>) are not part of the value.
std::string string_item_text(const XmlElement& si) {
  std::string out;
  for (const auto& c : si.children) {
    if (c->name == "t") {
      out += c->text;
    } else if (c->name == "r") {
      if (const auto* t = c->child("t")) out += t->text;
    }
  }
  return out;
}

std::vector<std::string> read_shared_strings(const XmlElement& root) {
  std::vector<std::string> out;
  root.for_each_child("si", [&](const XmlElement& si) {
    out.push_back(string_item_text(si));
  });
  return out;
}

// ---- worksheet ------------------------------------------------------------

std::optional<CellAddress> parse_a1(std::string_view ref) {
  std::size_t col = 0;
  std::size_t i = 0;
  while (i < ref.size() && ref[i] >= 'A' && ref[i] <= 'Z') {
    col = col * 26 + static_cast<std::size_t>(ref[i] - 'A' + 1);
    ++i;
  }
  if (i == 0 || i == ref.size() || col > 16384) return std::nullopt;
  std::size_t row = 0;
  auto [ptr, ec] = std::from_chars(ref.data() + i, ref.data() + ref.size(), row);
  if (ec != std::errc() || ptr != ref.data() + ref.size() || row == 0) {
    return std::nullopt;
  }
  return CellAddress{row - 1, col - 1};
}

struct ParsedCell {
  CellAddress addr;
  Cell cell;
};

struct SheetContent {
  std::vector<ParsedCell> cells;
  std::vector<bool> hidden_rows;
  std::vector<bool> hidden_cols;
};

void mark(std::vector<bool>& v, std::size_t index) {
  if (index >= v.size()) v.resize(index + 1, false);
  v[index] = true;
}

bool is_marked(const std::vector<bool>& v, std::size_t index) {
  return index < v.size() && v[index];
}

SheetContent read_sheet(const XmlElement& root, const std::string& part,
                        const std::vector<std::string>& shared,
                        const StyleTable& styles, IngestWarnings* warnings) {
  SheetContent out;
  if (const auto* cols = root.child("cols")) {
    cols->for_each_child("col", [&](const XmlElement& c) {
      const auto* width = c.attr("width");
      const bool zero_width = width && std::strtod(width->c_str(), nullptr) == 0.0;
      if (!truthy(c.attr("hidden")) && !zero_width) return;
      auto lo = to_long(c.attr_or("min", "0"));
      auto hi = to_long(c.attr_or("max", "0"));
      if (!lo || !hi || *lo < 1 || *hi < *lo || *hi > 16384) return;
      for (long k = *lo; k <= *hi; ++k) mark(out.hidden_cols, static_cast<std::size_t>(k - 1));
    });
  }

  const XmlElement* data = root.child("sheetData");
  if (!data) throw MalformedPart(part, "worksheet has no sheetData");

  std::size_t next_row = 0;
  for (const auto& row_el : data->children) {
    if (row_el->name != "row") continue;
    std::size_t row = next_row;
    if (const auto* r = row_el->attr("r")) {
      auto v = to_long(*r);
      if (!v || *v < 1) throw MalformedPart(part, "bad row number '" + *r + "'");
      row = static_cast<std::size_t>(*v - 1);
    }
    next_row = row + 1;
    const bool zero_height = truthy(row_el->attr("customHeight")) &&
                             std::strtod(row_el->attr_or("ht", "1").c_str(), nullptr) == 0.0;
    if (truthy(row_el->attr("hidden")) || zero_height) mark(out.hidden_rows, row);

    std::size_t next_col = 0;
    for (const auto& c : row_el->children) {
      if (c->name != "c") continue;
      CellAddress addr{row, next_col};
      if (const auto* ref = c->attr("r")) {
        auto a = parse_a1(*ref);
        if (!a) throw MalformedPart(part, "bad cell reference '" + *ref + "'");
        addr = *a;
      }
      next_col = addr.col + 1;

      ParsedCell pc{addr, {}};
      if (auto s = to_long(c->attr_or("s", "0")); s && *s >= 0) {
        pc.cell.format = styles.lookup(static_cast<std::size_t>(*s));
      }
      const std::string type = c->attr_or("t", "n");
      const XmlElement* v = c->child("v");
      const std::string ref_text = to_string(addr);
      if (type == "s") {
        if (v) {
          auto idx = to_long(v->text);
          if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= shared.size()) {
            throw MalformedPart(part, "shared string index out of range at " + ref_text);
          }
          pc.cell.value = CellValue::text(shared[static_cast<std::size_t>(*idx)]);
        }
      } else if (type == "inlineStr") {
        if (const auto* is = c->child("is")) {
          pc.cell.value = CellValue::text(string_item_text(*is));
        }
      } else if (type == "b") {
        if (v) pc.cell.value = CellValue::text(v->text == "1" ? "TRUE" : "FALSE");
      } else if (type == "str" || type == "e") {
        if (v) pc.cell.value = CellValue::text(v->text);
      } else if (type == "d") {
        if (v) pc.cell.value = classify_value(v->text, FormatCategory::Date);
      } else if (v) {
        double number = 0.0;
        const std::string& raw = v->text;
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), number);
        if (ec == std::errc() && ptr == raw.data() + raw.size() && std::isfinite(number)) {
          pc.cell.value = CellValue::number(number);
        } else {
          pc.cell.value = CellValue::text(raw);
          if (warnings) {
            warnings->push_back(part + " " + ref_text + ": non-finite or unparseable number '" +
                                raw + "' kept as text");
          }
        }
      }
      if (pc.cell.bears_content_or_format()) out.cells.push_back(std::move(pc));
    }
  }
  return out;
}

struct WorkbookParts {
  std::string workbook;
  std::vector<std::pair<std::string, std::string>> sheets;  // name, part
  std::optional<std::string> shared_strings;
  std::optional<std::string> styles;
};

WorkbookParts discover(const Package& pkg) {
  WorkbookParts parts;
  const auto root_rels = pkg.relationships("");
  const auto* office = find_by_type(root_rels, kRelOfficeDocument);
  if (!office) throw MalformedPart("_rels/.rels", "no officeDocument relationship");
  parts.workbook = office->target;

  const auto wb_rels = pkg.relationships(parts.workbook);
  if (const auto* ss = find_by_type(wb_rels, kRelSharedStrings)) parts.shared_strings = ss->target;
  if (const auto* st = find_by_type(wb_rels, kRelStyles)) parts.styles = st->target;

  auto wb = pkg.load(parts.workbook);
  const XmlElement* sheets = wb->child("sheets");
  if (!sheets) throw MalformedPart(parts.workbook, "workbook lists no sheets");
  sheets->for_each_child("sheet", [&](const XmlElement& s) {
    const std::string name = s.attr_or("name", "");
    const std::string rid = s.attr_or("id", "");
    auto it = std::find_if(wb_rels.begin(), wb_rels.end(),
                           [&](const Relationship& r) { return r.id == rid; });
    if (it == wb_rels.end()) {
      throw MalformedPart(parts.workbook, "sheet '" + name + "' has no relationship " + rid);
    }
    parts.sheets.emplace_back(name, it->target);
  });
  if (parts.sheets.empty()) throw MalformedPart(parts.workbook, "workbook lists no sheets");
  return parts;
}

}  // namespace

std::vector<std::string> list_xlsx_sheets(std::span<const std::byte> bytes) {
  Package pkg(bytes);
  std::vector<std::string> names;
  for (const auto& [name, part] : discover(pkg).sheets) names.push_back(name);
  return names;
}

CellGrid read_xlsx(std::span<const std::byte> bytes, const IngestOptions& opts,
                   IngestWarnings* warnings) {
  Package pkg(bytes);
  const WorkbookParts parts = discover(pkg);

  std::string sheet_part = parts.sheets.front().second;
  if (opts.sheet_name) {
    auto it = std::find_if(parts.sheets.begin(), parts.sheets.end(),
                           [&](const auto& s) { return s.first == *opts.sheet_name; });
    if (it == parts.sheets.end()) throw MissingSheet(*opts.sheet_name);
    sheet_part = it->second;
  }

  std::vector<std::string> shared;
  if (parts.shared_strings) shared = read_shared_strings(*pkg.load(*parts.shared_strings));
  StyleTable styles;
  if (parts.styles) styles = read_styles(*pkg.load(*parts.styles));

  SheetContent content = read_sheet(*pkg.load(sheet_part), sheet_part, shared, styles, warnings);
  if (content.cells.empty()) {
    throw EmptyInput("sheet '" + (opts.sheet_name ? *opts.sheet_name : parts.sheets.front().first) +
                     "' has no content");
  }

  // The grid is anchored at A1 so grid addresses equal sheet addresses; its
  // extent is the bounding box of content- or format-bearing cells.
  std::size_t max_row = 0, max_col = 0;
  for (const auto& pc : content.cells) {
    max_row = std::max(max_row, pc.addr.row);
    max_col = std::max(max_col, pc.addr.col);
  }
  CellGrid grid(max_row + 1, max_col + 1);
  for (auto& pc : content.cells) {
    if (is_marked(content.hidden_rows, pc.addr.row) ||
        is_marked(content.hidden_cols, pc.addr.col)) {
      continue;  // hidden and zero-sized rows/columns read as empty cells
    }
    grid.at(pc.addr) = std::move(pc.cell);
  }
  return grid;
}

}  // namespace sheetscape
