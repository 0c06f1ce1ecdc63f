#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetscape {

struct CellAddress {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const CellAddress&, const CellAddress&) = default;
};

std::string to_string(const CellAddress& addr);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct BorderFlags {
  bool left = false;
  bool right = false;
  bool top = false;
  bool bottom = false;

  bool any() const { return left || right || top || bottom; }
  friend bool operator==(const BorderFlags&, const BorderFlags&) = default;
};

enum class FormatCategory { General, Number, Currency, Percent, Date, Time, TextFmt };

inline constexpr std::size_t kFormatCategoryCount = 7;

std::string_view category_name(FormatCategory category);
std::optional<FormatCategory> parse_category(std::string_view name);

struct CellFormat {
  std::optional<Rgb> fill_color;
  BorderFlags border;
  bool font_bold = false;
  FormatCategory category = FormatCategory::General;
  std::optional<std::string> number_format_string;

  /// True when nothing about the cell would be visible on an empty sheet.
  bool is_default() const;

  friend bool operator==(const CellFormat&, const CellFormat&) = default;
};

/// Tagged cell content. Numbers are always finite and text is never empty;
/// the factories enforce both.
class CellValue {
 public:
  enum class Kind { Empty, Number, Text };

  CellValue() = default;

  static CellValue empty() { return CellValue(); }
  /// Throws std::invalid_argument for NaN or infinity.
  static CellValue number(double value);
  /// An empty string yields an Empty value.
  static CellValue text(std::string value);

  Kind kind() const;
  bool is_empty() const { return kind() == Kind::Empty; }
  bool is_number() const { return kind() == Kind::Number; }
  bool is_text() const { return kind() == Kind::Text; }

  double as_number() const { return std::get<double>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }

  friend bool operator==(const CellValue&, const CellValue&) = default;

 private:
  std::variant<std::monostate, double, std::string> data_;
};

std::string_view kind_name(CellValue::Kind kind);

struct Cell {
  CellValue value;
  CellFormat format;

  /// Has a value, or has formatting that would show up as a tile.
  bool bears_content_or_format() const {
    return !value.is_empty() || !format.is_default();
  }

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Inclusive rectangle of cell addresses.
struct CellRange {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t bottom = 0;
  std::size_t right = 0;

  std::size_t n_rows() const { return bottom - top + 1; }
  std::size_t n_cols() const { return right - left + 1; }
  std::size_t cell_count() const { return n_rows() * n_cols(); }
  bool contains(const CellAddress& a) const {
    return a.row >= top && a.row <= bottom && a.col >= left && a.col <= right;
  }

  friend bool operator==(const CellRange&, const CellRange&) = default;
};

/// Parses the 0-based "r,c:r,c" form. Returns nullopt on syntax errors or
/// when the corners are out of order.
std::optional<CellRange> parse_range(std::string_view text);
std::string to_string(const CellRange& range);

/// Dense row-major sheet content. Every position holds a Cell, Empty or not.
class CellGrid {
 public:
  /// Both dimensions must be positive (std::invalid_argument otherwise).
  CellGrid(std::size_t n_rows, std::size_t n_cols);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  CellRange full_range() const { return {0, 0, n_rows_ - 1, n_cols_ - 1}; }
  bool contains(const CellAddress& a) const {
    return a.row < n_rows_ && a.col < n_cols_;
  }

  /// Bounds-checked; throws RangeOutOfBounds.
  const Cell& at(const CellAddress& a) const;
  Cell& at(const CellAddress& a);

  std::span<const Cell> cells() const { return cells_; }

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<Cell> cells_;
};

/// Read-only window over a rectangle of a grid. The grid must outlive the
/// view. Addresses are absolute sheet coordinates, and at() refuses any
/// address outside the window.
class GridView {
 public:
  GridView(const CellGrid& grid, CellRange range);

  const CellGrid& grid() const { return *grid_; }
  const CellRange& range() const { return range_; }
  std::size_t n_rows() const { return range_.n_rows(); }
  std::size_t n_cols() const { return range_.n_cols(); }
  std::size_t cell_count() const { return range_.cell_count(); }
  bool contains(const CellAddress& a) const { return range_.contains(a); }

  const Cell& at(const CellAddress& a) const;

  /// Visits every cell in row-major order as f(address, cell).
  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t r = range_.top; r <= range_.bottom; ++r) {
      for (std::size_t c = range_.left; c <= range_.right; ++c) {
        const CellAddress a{r, c};
        f(a, grid_->at(a));
      }
    }
  }

 private:
  const CellGrid* grid_;
  CellRange range_;
};

/// Interprets raw cell text. Total: every input maps to Empty, Number or Text.
/// All-whitespace input is Empty. Numeric text may carry a sign, thousands
/// separators, a currency symbol, a trailing '%' (divides by 100) or
/// accounting parentheses. Date and Time categories also accept ISO dates
/// (yyyy-mm-dd) and clock times (hh:mm[:ss]) and store spreadsheet serial
/// numbers.
CellValue classify_value(std::string_view raw, FormatCategory category);

struct ClassifiedText {
  CellValue value;
  FormatCategory category = FormatCategory::General;
};

/// Classification for untyped sources such as CSV: as classify_value under
/// General, and additionally reports Percent or Currency when the number
/// carried that decoration.
ClassifiedText classify_untyped(std::string_view raw);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double value);

/// Display text for a value under a category. classify_value() recovers the
/// value from this text.
std::string format_value(const CellValue& value, FormatCategory category);

/// Spreadsheet serial day numbers (1900 date system, including the phantom
/// 1900-02-29 at serial 60).
std::optional<double> serial_from_ymd(int year, unsigned month, unsigned day);
struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};
std::optional<CivilDate> ymd_from_serial(long serial);

/// Throws RangeOutOfBounds when any corner is outside the grid.
GridView select_range(const CellGrid& grid, const CellRange& range);

struct EditResult {
  Cell old_cell;
  Cell new_cell;
};

/// Replaces one cell's value with classify_value(new_raw, its category). The
/// format is kept unchanged. Throws RangeOutOfBounds.
EditResult apply_edit(CellGrid& grid, const CellAddress& addr,
                      std::string_view new_raw);

}  // namespace sheetscape
