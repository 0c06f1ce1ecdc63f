#pragma once

#include "sheetscape/grid.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sheetscape {

struct IngestOptions {
  std::optional<std::string> sheet_name;  // XLSX only; first sheet if unset
  char csv_delimiter = ',';
  std::optional<std::size_t> header_rows_hint;  // informational
};

/// Non-fatal oddities seen while reading, e.g. a numeric cell whose stored
/// value was not a finite number.
using IngestWarnings = std::vector<std::string>;

/// RFC 4180 reader. Quoted fields may contain delimiters, doubled quotes and
/// line breaks; CRLF, LF and lone CR all end a record. A leading UTF-8 BOM is
/// skipped. Throws EncodingError, EmptyInput, or std::invalid_argument for a
/// bad delimiter.
CellGrid read_csv(std::span<const std::byte> bytes, const IngestOptions& opts = {});
CellGrid read_csv(std::string_view text, const IngestOptions& opts = {});

/// Office Open XML workbook reader. Throws NotAZip, MissingSheet or
/// MalformedPart (naming the part).
CellGrid read_xlsx(std::span<const std::byte> bytes, const IngestOptions& opts = {},
                   IngestWarnings* warnings = nullptr);

/// Sheet names in workbook order.
std::vector<std::string> list_xlsx_sheets(std::span<const std::byte> bytes);

/// Picks read_xlsx for ZIP input (by magic bytes) and read_csv otherwise.
CellGrid read_workbook(std::span<const std::byte> bytes, const IngestOptions& opts = {},
                       IngestWarnings* warnings = nullptr);

bool looks_like_zip(std::span<const std::byte> bytes);

/// Classifies a spreadsheet number-format code by token scan. Quoted
/// literals, escaped characters and bracketed sections are ignored except for
/// "[$<symbol>" currency tags and elapsed-time brackets. First match wins:
/// percent, currency, date, time, text, number, general.
FormatCategory infer_format_category(std::string_view number_format);

}  // namespace sheetscape
