#include "sheetscape/ingest.hpp"

#include <cctype>
#include <string>

namespace sheetscape {

namespace {

char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool iequals_at(std::string_view s, std::size_t pos, std::string_view word) {
  if (pos + word.size() > s.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (lower(s[pos + i]) != lower(word[i])) return false;
  }
  return true;
}

bool has_currency_symbol(std::string_view s) {
  return s.find('$') != std::string_view::npos ||
         s.find("\xE2\x82\xAC") != std::string_view::npos ||  // euro
         s.find("\xC2\xA3") != std::string_view::npos ||      // pound
         s.find("\xC2\xA5") != std::string_view::npos;        // yen
}

struct Scan {
  std::string tokens;  // lowercased code with literals and tags removed
  bool currency_tag = false;
  bool elapsed_time = false;
  bool am_pm = false;
};

Scan scan_tokens(std::string_view code) {
  Scan out;
  std::size_t i = 0;
  while (i < code.size()) {
    const char c = code[i];
    if (c == '"') {
      const auto close = code.find('"', i + 1);
      const auto end = close == std::string_view::npos ? code.size() : close;
      out.currency_tag |= has_currency_symbol(code.substr(i + 1, end - i - 1));
      i = end == code.size() ? end : end + 1;
    } else if (c == '\\' || c == '_' || c == '*') {
      // Escaped literal, padding or fill: skip one whole UTF-8 character.
      std::size_t len = 1;
      if (i + 1 < code.size()) {
        const auto lead = static_cast<unsigned char>(code[i + 1]);
        len = lead >= 0xF0 ? 4 : lead >= 0xE0 ? 3 : lead >= 0xC0 ? 2 : 1;
      }
      const std::string_view ch = code.substr(i + 1, len);
      if (c == '\\') out.currency_tag |= has_currency_symbol(ch);
      i += 1 + len;
    } else if (c == '[') {
      const auto close = code.find(']', i + 1);
      const std::string_view body =
          code.substr(i + 1, close == std::string_view::npos
                                 ? std::string_view::npos
                                 : close - i - 1);
      if (body.size() >= 2 && body[0] == '$' && body[1] != '-') {
        out.currency_tag = true;
      } else if (!body.empty() && (lower(body[0]) == 'h' ||
                                   lower(body[0]) == 'm' ||
                                   lower(body[0]) == 's')) {
        bool all_same = true;
        for (char b : body) all_same &= lower(b) == lower(body[0]);
        out.elapsed_time |= all_same;
      }
      i = close == std::string_view::npos ? code.size() : close + 1;
    } else if (iequals_at(code, i, "general")) {
      i += 7;
    } else if (iequals_at(code, i, "am/pm")) {
      out.am_pm = true;
      i += 5;
    } else if (iequals_at(code, i, "a/p")) {
      out.am_pm = true;
      i += 3;
    } else {
      out.tokens.push_back(lower(c));
      ++i;
    }
  }
  return out;
}

// A month name (mmm or longer) marks a date even without y or d tokens. A
// shorter m run next to y or d is already covered by those tokens.
bool has_date_month(std::string_view t) {
  for (std::size_t i = 0; i < t.size();) {
    if (t[i] != 'm') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < t.size() && t[j] == 'm') ++j;
    if (j - i >= 3) return true;
    i = j;
  }
  return false;
}

}  // namespace

FormatCategory infer_format_category(std::string_view number_format) {
  const Scan scan = scan_tokens(number_format);
  const std::string& t = scan.tokens;
  if (t.find('%') != std::string::npos) return FormatCategory::Percent;
  if (scan.currency_tag || has_currency_symbol(t)) return FormatCategory::Currency;
  if (t.find('y') != std::string::npos || t.find('d') != std::string::npos ||
      has_date_month(t)) {
    return FormatCategory::Date;
  }
  if (scan.elapsed_time || scan.am_pm || t.find('h') != std::string::npos ||
      t.find('s') != std::string::npos) {
    return FormatCategory::Time;
  }
  if (t.find('@') != std::string::npos) return FormatCategory::TextFmt;
  if (t.find('0') != std::string::npos || t.find('#') != std::string::npos) {
    return FormatCategory::Number;
  }
  return FormatCategory::General;
}

}  // namespace sheetscape
