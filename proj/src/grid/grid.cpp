#include "sheetscape/errors.hpp"
#include "sheetscape/grid.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace sheetscape {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RangeOutOfBounds: return "RangeOutOfBounds";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NotAZip: return "NotAZip";
    case ErrorCode::MissingSheet: return "MissingSheet";
    case ErrorCode::MalformedPart: return "MalformedPart";
    case ErrorCode::EmptyView: return "EmptyView";
    case ErrorCode::NoNumericCells: return "NoNumericCells";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::SceneTooLarge: return "SceneTooLarge";
    case ErrorCode::StaleRevision: return "StaleRevision";
    case ErrorCode::UnknownGlyph: return "UnknownGlyph";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::BadMessage: return "BadMessage";
  }
  return "Unknown";
}

std::string to_string(const CellAddress& addr) {
  return "(" + std::to_string(addr.row) + "," + std::to_string(addr.col) + ")";
}

std::string_view category_name(FormatCategory category) {
  switch (category) {
    case FormatCategory::General: return "general";
    case FormatCategory::Number: return "number";
    case FormatCategory::Currency: return "currency";
    case FormatCategory::Percent: return "percent";
    case FormatCategory::Date: return "date";
    case FormatCategory::Time: return "time";
    case FormatCategory::TextFmt: return "text";
  }
  return "general";
}

std::optional<FormatCategory> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kFormatCategoryCount; ++i) {
    const auto c = static_cast<FormatCategory>(i);
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

bool CellFormat::is_default() const {
  return !fill_color && !border.any() && !font_bold &&
         category == FormatCategory::General && !number_format_string;
}

CellValue CellValue::number(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cell numbers must be finite");
  }
  CellValue v;
  v.data_ = value;
  return v;
}

CellValue CellValue::text(std::string value) {
  CellValue v;
  if (!value.empty()) v.data_ = std::move(value);
  return v;
}

CellValue::Kind CellValue::kind() const {
  switch (data_.index()) {
    case 1: return Kind::Number;
    case 2: return Kind::Text;
    default: return Kind::Empty;
  }
}

std::string_view kind_name(CellValue::Kind kind) {
  switch (kind) {
    case CellValue::Kind::Empty: return "empty";
    case CellValue::Kind::Number: return "number";
    case CellValue::Kind::Text: return "text";
  }
  return "empty";
}

namespace {

bool parse_index(std::string_view s, std::size_t& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_corner(std::string_view s, std::size_t& row, std::size_t& col) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return false;
  return parse_index(s.substr(0, comma), row) &&
         parse_index(s.substr(comma + 1), col);
}

}  // namespace

std::optional<CellRange> parse_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  CellRange r;
  if (!parse_corner(text.substr(0, colon), r.top, r.left) ||
      !parse_corner(text.substr(colon + 1), r.bottom, r.right)) {
    return std::nullopt;
  }
  if (r.top > r.bottom || r.left > r.right) return std::nullopt;
  return r;
}

std::string to_string(const CellRange& range) {
  return std::to_string(range.top) + "," + std::to_string(range.left) + ":" +
         std::to_string(range.bottom) + "," + std::to_string(range.right);
}

CellGrid::CellGrid(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols) {
  if (n_rows == 0 || n_cols == 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  cells_.resize(n_rows * n_cols);
}

const Cell& CellGrid::at(const CellAddress& a) const {
  if (!contains(a)) {
    throw RangeOutOfBounds("cell " + to_string(a) + " outside " +
                           std::to_string(n_rows_) + "x" +
                           std::to_string(n_cols_) + " grid");
  }
  return cells_[a.row * n_cols_ + a.col];
}

Cell& CellGrid::at(const CellAddress& a) {
  return const_cast<Cell&>(std::as_const(*this).at(a));
}

GridView::GridView(const CellGrid& grid, CellRange range)
    : grid_(&grid), range_(range) {
  if (range.top > range.bottom || range.left > range.right ||
      range.bottom >= grid.n_rows() || range.right >= grid.n_cols()) {
    throw RangeOutOfBounds("range " + to_string(range) + " outside " +
                           std::to_string(grid.n_rows()) + "x" +
                           std::to_string(grid.n_cols()) + " grid");
  }
}

const Cell& GridView::at(const CellAddress& a) const {
  if (!range_.contains(a)) {
    throw RangeOutOfBounds("cell " + to_string(a) + " outside view " +
                           to_string(range_));
  }
  return grid_->at(a);
}

GridView select_range(const CellGrid& grid, const CellRange& range) {
  return GridView(grid, range);
}

EditResult apply_edit(CellGrid& grid, const CellAddress& addr,
                      std::string_view new_raw) {
  Cell& cell = grid.at(addr);
  EditResult result{cell, cell};
  result.new_cell.value = classify_value(new_raw, cell.format.category);
  cell.value = result.new_cell.value;
  return result;
}

}  // namespace sheetscape
