// Text <-> value conversion for cells: classification of raw text and the
// matching display formatter.

#include "sheetscape/grid.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace sheetscape {

namespace {

constexpr std::array<std::string_view, 4> kCurrencySymbols = {"$", "\xE2\x82\xAC",
                                                              "\xC2\xA3", "\xC2\xA5"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool strip_currency_prefix(std::string_view& s) {
  for (auto sym : kCurrencySymbols) {
    if (s.starts_with(sym)) {
      s.remove_prefix(sym.size());
      s = trim(s);
      return true;
    }
  }
  return false;
}

bool strip_currency_suffix(std::string_view& s) {
  for (auto sym : kCurrencySymbols) {
    if (s.ends_with(sym)) {
      s.remove_suffix(sym.size());
      s = trim(s);
      return true;
    }
  }
  return false;
}

// Validates "d{1,3}(,ddd)+" grouping in the integer part and returns the
// digits without separators.
std::optional<std::string> strip_grouping(std::string_view core) {
  const auto dot = core.find_first_of(".eE");
  std::string_view int_part = core.substr(0, dot);
  std::string_view rest =
      dot == std::string_view::npos ? std::string_view{} : core.substr(dot);
  if (rest.find(',') != std::string_view::npos) return std::nullopt;
  std::string out;
  std::size_t group_len = 0;
  bool first_group = true;
  for (char c : int_part) {
    if (c == ',') {
      if (group_len == 0 || (first_group && group_len > 3) ||
          (!first_group && group_len != 3)) {
        return std::nullopt;
      }
      first_group = false;
      group_len = 0;
      continue;
    }
    out.push_back(c);
    ++group_len;
  }
  if (!first_group && group_len != 3) return std::nullopt;
  out.append(rest);
  return out;
}

std::optional<double> parse_plain_decimal(std::string_view core) {
  if (core.empty()) return std::nullopt;
  bool has_digit = false;
  for (char c : core) {
    if (is_digit(c)) {
      has_digit = true;
    } else if (c != '.' && c != 'e' && c != 'E' && c != '+' && c != '-' &&
               c != ',') {
      return std::nullopt;
    }
  }
  if (!has_digit || !(is_digit(core.front()) || core.front() == '.')) {
    return std::nullopt;
  }
  std::string digits;
  if (core.find(',') != std::string_view::npos) {
    auto stripped = strip_grouping(core);
    if (!stripped) return std::nullopt;
    digits = std::move(*stripped);
  } else {
    digits.assign(core);
  }
  double value = 0.0;
  const char* first = digits.data();
  const char* last = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct ParsedNumber {
  double value = 0.0;
  bool percent = false;
  bool currency = false;
};

std::optional<ParsedNumber> parse_numeric(std::string_view s) {
  ParsedNumber out;
  bool negative = false;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    negative = true;
    s = trim(s.substr(1, s.size() - 2));
  }
  auto take_sign = [&] {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      if (s.front() == '-') negative = !negative;
      s.remove_prefix(1);
      s = trim(s);
      return true;
    }
    return false;
  };
  const bool signed_first = take_sign();
  out.currency = strip_currency_prefix(s);
  if (!signed_first && out.currency) take_sign();
  if (!s.empty() && s.back() == '%') {
    out.percent = true;
    s.remove_suffix(1);
    s = trim(s);
  }
  if (!out.currency && !out.percent) out.currency = strip_currency_suffix(s);
  auto v = parse_plain_decimal(s);
  if (!v) return std::nullopt;
  double value = *v;
  if (out.percent) value /= 100.0;
  if (negative) value = -value;
  out.value = value;
  return out;
}

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// "hh:mm" or "hh:mm:ss[.fff]" as a fraction of a day.
std::optional<double> parse_clock(std::string_view s) {
  const auto c1 = s.find(':');
  if (c1 == std::string_view::npos) return std::nullopt;
  unsigned hours = 0, minutes = 0;
  if (!parse_uint(s.substr(0, c1), hours)) return std::nullopt;
  std::string_view rest = s.substr(c1 + 1);
  const auto c2 = rest.find(':');
  double seconds = 0.0;
  if (!parse_uint(rest.substr(0, c2), minutes) || minutes > 59) {
    return std::nullopt;
  }
  if (c2 != std::string_view::npos) {
    auto sec = parse_plain_decimal(rest.substr(c2 + 1));
    if (!sec || *sec >= 60.0) return std::nullopt;
    seconds = *sec;
  }
  return (hours * 3600.0 + minutes * 60.0 + seconds) / 86400.0;
}

// "yyyy-mm-dd" optionally followed by " hh:mm[:ss]".
std::optional<double> parse_iso_date(std::string_view s) {
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  unsigned y = 0, m = 0, d = 0;
  if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), m) ||
      !parse_uint(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  auto serial = serial_from_ymd(static_cast<int>(y), m, d);
  if (!serial) return std::nullopt;
  if (s.size() == 10) return serial;
  if (s[10] != ' ' && s[10] != 'T') return std::nullopt;
  auto clock = parse_clock(s.substr(11));
  if (!clock || *clock >= 1.0) return std::nullopt;
  return *serial + *clock;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

CivilDate civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), m, d};
}

unsigned days_in_month(int y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30,
                                       31, 31, 30, 31, 30, 31};
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
  return kDays[m - 1];
}

constexpr long kMaxSerial = 2958465;  // 9999-12-31

std::string group_thousands(const std::string& plain) {
  const auto dot = plain.find('.');
  std::string int_part = plain.substr(0, dot);
  std::string out;
  const std::size_t n = int_part.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(int_part[i]);
    const std::size_t remaining = n - i - 1;
    if (remaining > 0 && remaining % 3 == 0) out.push_back(',');
  }
  if (dot != std::string::npos) out.append(plain.substr(dot));
  return out;
}

std::string two_digits(unsigned v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02u", v);
  return buf;
}

std::optional<std::string> format_clock(double day_fraction) {
  const double secs = day_fraction * 86400.0;
  const double rounded = std::round(secs);
  if (std::fabs(secs - rounded) > 1e-6 || rounded < 0 || rounded >= 86400) {
    return std::nullopt;
  }
  const auto total = static_cast<unsigned>(rounded);
  return two_digits(total / 3600) + ":" + two_digits(total / 60 % 60) + ":" +
         two_digits(total % 60);
}

std::optional<std::string> format_date(double serial) {
  if (serial < 1 || serial > kMaxSerial) return std::nullopt;
  const double whole = std::floor(serial);
  auto ymd = ymd_from_serial(static_cast<long>(whole));
  if (!ymd) return std::nullopt;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", ymd->year, ymd->month,
                ymd->day);
  std::string out = buf;
  if (serial == whole) return out;
  auto clock = format_clock(serial - whole);
  if (!clock) return std::nullopt;
  return out + " " + *clock;
}

}  // namespace

std::optional<double> serial_from_ymd(int year, unsigned month, unsigned day) {
  if (year < 1900 || year > 9999 || month < 1 || month > 12 || day < 1) {
    return std::nullopt;
  }
  if (year == 1900 && month == 2 && day == 29) return 60.0;
  if (day > days_in_month(year, month)) return std::nullopt;
  const long days = days_from_civil(year, month, day);
  if (year == 1900 && month <= 2) {
    return static_cast<double>(days - days_from_civil(1899, 12, 31));
  }
  return static_cast<double>(days - days_from_civil(1899, 12, 30));
}

std::optional<CivilDate> ymd_from_serial(long serial) {
  if (serial < 1 || serial > kMaxSerial) return std::nullopt;
  if (serial == 60) return CivilDate{1900, 2, 29};
  if (serial < 60) return civil_from_days(days_from_civil(1899, 12, 31) + serial);
  return civil_from_days(days_from_civil(1899, 12, 30) + serial);
}

CellValue classify_value(std::string_view raw, FormatCategory category) {
  const std::string_view s = trim(raw);
  if (s.empty()) return CellValue::empty();
  if (auto n = parse_numeric(s)) return CellValue::number(n->value);
  if (category == FormatCategory::Date) {
    if (auto serial = parse_iso_date(s)) return CellValue::number(*serial);
  }
  if (category == FormatCategory::Time || category == FormatCategory::Date) {
    if (auto clock = parse_clock(s)) return CellValue::number(*clock);
  }
  return CellValue::text(std::string(raw));
}

ClassifiedText classify_untyped(std::string_view raw) {
  const std::string_view s = trim(raw);
  if (s.empty()) return {};
  if (auto n = parse_numeric(s)) {
    FormatCategory c = FormatCategory::General;
    if (n->percent) {
      c = FormatCategory::Percent;
    } else if (n->currency) {
      c = FormatCategory::Currency;
    }
    return {CellValue::number(n->value), c};
  }
  return {CellValue::text(std::string(raw)), FormatCategory::General};
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "0";
  return std::string(buf, ptr);
}

std::string format_value(const CellValue& value, FormatCategory category) {
  switch (value.kind()) {
    case CellValue::Kind::Empty: return {};
    case CellValue::Kind::Text: return value.as_text();
    case CellValue::Kind::Number: break;
  }
  const double v = value.as_number();
  switch (category) {
    case FormatCategory::Percent:
      if (std::isfinite(v * 100.0)) return format_number(v * 100.0) + "%";
      break;
    case FormatCategory::Currency: {
      std::string plain = format_number(std::fabs(v));
      if (plain.find_first_of("eE") == std::string::npos) {
        plain = group_thousands(plain);
      }
      return (std::signbit(v) ? "-$" : "$") + plain;
    }
    case FormatCategory::Date:
      if (auto d = format_date(v)) return *d;
      break;
    case FormatCategory::Time:
      if (v >= 0 && v < 1) {
        if (auto t = format_clock(v)) return *t;
      }
      break;
    default:
      break;
  }
  return format_number(v);
}

}  // namespace sheetscape
