#include "sheetscape/export.hpp"

namespace sheetscape {

namespace {

void append_field(std::string& out, const std::string& text, char delimiter) {
  const bool quote = text.find_first_of(std::string{delimiter, '"', '\r', '\n'}) !=
                         std::string::npos ||
                     (!text.empty() && (text.front() == ' ' || text.back() == ' '));
  if (!quote) {
    out += text;
    return;
  }
  out.push_back('"');
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string write_csv(const CellGrid& grid, char delimiter) {
  std::string out;
  for (std::size_t r = 0; r < grid.n_rows(); ++r) {
    if (r > 0) out += "\r\n";
    const std::size_t before = out.size();
    for (std::size_t c = 0; c < grid.n_cols(); ++c) {
      if (c > 0) out.push_back(delimiter);
      const CellValue& v = grid.at({r, c}).value;
      if (v.is_number()) {
        out += format_number(v.as_number());
      } else if (v.is_text()) {
        append_field(out, v.as_text(), delimiter);
      }
    }
    // A lone empty field would read back as a blank line.
    if (out.size() == before && grid.n_cols() == 1) out += "\"\"";
  }
  return out;
}

}  // namespace sheetscape
