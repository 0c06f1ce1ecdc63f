#include "sheetscape/errors.hpp"
#include "sheetscape/ingest.hpp"

#include <algorithm>
#include <stdexcept>

namespace sheetscape {

namespace {

// Returns the byte offset of the first invalid sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

using Record = std::vector<std::string>;

std::vector<Record> split_records(std::string_view s, char delim) {
  std::vector<Record> records;
  Record record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // anything seen for the current record
  std::size_t i = 0;
  const std::size_t n = s.size();

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };

  while (i < n) {
    const char c = s[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && s[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"') {
      // Quotes open a quoted section anywhere in a field; lenient about
      // text before the quote.
      in_quotes = true;
      field_started = true;
      ++i;
    } else if (c == delim) {
      end_field();
      field_started = true;
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_record();
      i += (c == '\r' && i + 1 < n && s[i + 1] == '\n') ? 2 : 1;
    } else {
      field.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

CellGrid read_csv(std::string_view text, const IngestOptions& opts) {
  const char delim = opts.csv_delimiter;
  if (delim == '"' || delim == '\r' || delim == '\n' ||
      (static_cast<unsigned char>(delim) < 0x20 && delim != '\t')) {
    throw std::invalid_argument("unsupported CSV delimiter");
  }
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  if (auto bad = find_invalid_utf8(text); bad != std::string_view::npos) {
    throw EncodingError("invalid UTF-8 at byte " + std::to_string(bad));
  }
  auto records = split_records(text, delim);
  if (records.empty()) throw EmptyInput("CSV input has no records");

  std::size_t n_cols = 0;
  for (const auto& r : records) n_cols = std::max(n_cols, r.size());
  CellGrid grid(records.size(), n_cols);
  for (std::size_t row = 0; row < records.size(); ++row) {
    for (std::size_t col = 0; col < records[row].size(); ++col) {
      auto classified = classify_untyped(records[row][col]);
      Cell& cell = grid.at({row, col});
      cell.value = std::move(classified.value);
      cell.format.category = classified.category;
    }
  }
  return grid;
}

CellGrid read_csv(std::span<const std::byte> bytes, const IngestOptions& opts) {
  return read_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                   bytes.size()),
                  opts);
}

bool looks_like_zip(std::span<const std::byte> bytes) {
  return bytes.size() >= 4 && bytes[0] == std::byte{'P'} &&
         bytes[1] == std::byte{'K'} && bytes[2] == std::byte{3} &&
         bytes[3] == std::byte{4};
}

CellGrid read_workbook(std::span<const std::byte> bytes, const IngestOptions& opts,
                       IngestWarnings* warnings) {
  if (looks_like_zip(bytes)) return read_xlsx(bytes, opts, warnings);
  return read_csv(bytes, opts);
}

}  // namespace sheetscape
