#pragma once

#include "sheetscape/anomaly.hpp"
#include "sheetscape/grid.hpp"
#include "sheetscape/scene.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sheetscape::testing {

// --- random generation -----------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::size_t index(std::size_t n) {  // [0, n)
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
  }
  std::size_t between(std::size_t lo, std::size_t hi) {  // [lo, hi]
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(eng_);
  }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }

  template <typename T>
  const T& pick(const std::vector<T>& xs) { return xs[index(xs.size())]; }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

struct GridShape {
  double p_number = 0.45;
  double p_text = 0.15;
  double p_fill = 0.25;
  double p_border = 0.15;
  double p_bold = 0.1;
  double p_category = 0.3;  // non-General category on a cell
  double p_small_int = 0.3;  // draw numbers from a tiny set, forcing ties
};

Rgb random_rgb(Rng& rng);
CellFormat random_format(Rng& rng, const GridShape& shape);
double random_number(Rng& rng, const GridShape& shape);
std::string random_text(Rng& rng);
CellGrid random_grid(Rng& rng, std::size_t rows, std::size_t cols, const GridShape& shape = {});
CellRange random_range(Rng& rng, const CellGrid& grid);
SceneConfig random_config(Rng& rng, GlyphMode mode);
/// Raw text for an edit: numbers in several spellings, text, blanks.
std::string random_edit_text(Rng& rng);

// --- independent oracles ---------------------------------------------------

namespace oracle {

/// Glyph counts the mapping rules require for a view.
struct Counts {
  std::size_t bars = 0;
  std::size_t tiles = 0;
  std::size_t labels = 0;
  std::size_t patches = 0;
  std::size_t pickable = 0;  // cells that must appear in the pick map

  friend bool operator==(const Counts&, const Counts&) = default;
};

bool format_bearing(const CellFormat& f);
Counts expected_counts(const GridView& view, GlyphMode mode);
Counts actual_counts(const SceneModel& scene);

/// Surface quads whose four corners are numeric.
std::size_t surface_patches(const GridView& view);

/// Straight from the normalization formulas, grouping by hand.
struct Heights {
  std::vector<double> heights;
  std::vector<std::size_t> group_of;  // index into the distinct-group order
};
Heights normalize(const std::vector<double>& values, const std::vector<FormatCategory>& categories,
                  const NormalizationPolicy& policy);

/// Sort-based median and spread; scale 0 when there is no usable spread.
struct Center {
  double median = 0.0;
  double scale = 0.0;
};
Center robust_center(const std::vector<double>& xs);
std::vector<double> robust_z(const std::vector<double>& xs);

/// A series position as the detectors see it.
struct Point {
  enum Kind { Num, Txt, Emp } kind = Emp;
  double v = 0.0;
};

struct Flag {
  std::size_t index = 0;
  Detector detector = Detector::Fin;
  double score = 0.0;

  friend bool operator==(const Flag&, const Flag&) = default;
};

/// Brute-force detectors for one series; output sorted like a report.
std::vector<Flag> detect(const std::vector<Point>& series, const DetectorParams& params);

}  // namespace oracle

// --- comparison helpers ----------------------------------------------------

/// First difference between two scenes, heights compared within `tol`;
/// nullopt when equal.
std::optional<std::string> scene_difference(const SceneModel& a, const SceneModel& b,
                                            double tol = 1e-9);

/// Every rule that ties a scene to its view: glyph counts per the oracle,
/// grid-structure positions, colors, labels, dense row-major ids, the empty
/// cell rule, pick-map bijectivity and bounds. nullopt when all hold.
std::optional<std::string> mapping_violation(const GridView& view, const SceneModel& scene);

/// normalize() against the oracle plus monotonicity, [0, h_max] bounds,
/// exact argmin/argmax, the degenerate-group rule, positive-affine
/// invariance and per-group separation. Uses `rng` for the affine map.
std::optional<std::string> normalization_violation(Rng& rng, const std::vector<double>& values,
                                                   const std::vector<FormatCategory>& categories,
                                                   const NormalizationPolicy& policy);

// --- files -----------------------------------------------------------------

std::filesystem::path fixture_path(std::string_view name);
std::string read_text(const std::filesystem::path& p);
std::vector<std::byte> read_bytes(const std::filesystem::path& p);
std::vector<std::byte> to_bytes(std::string_view s);

/// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// --- ZIP writing (for hand-made workbooks) ---------------------------------

struct ZipEntry {
  std::string name;
  std::string data;
  bool deflate = true;
};
std::vector<std::byte> make_zip(const std::vector<ZipEntry>& entries);

/// A minimal valid workbook: one sheet named `sheet` with the given sheetData
/// rows XML, styles XML and shared strings XML (either may be empty).
std::vector<ZipEntry> workbook_parts(const std::string& sheet_data, const std::string& styles = {},
                                     const std::string& shared_strings = {},
                                     const std::string& sheet = "Sheet1");

}  // namespace sheetscape::testing
