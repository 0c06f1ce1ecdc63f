#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"

#include <json.hpp>

#include <cstdio>

namespace sheetscape {

namespace {

using ojson = nlohmann::ordered_json;

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string score_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string write_report(const AnomalyReport& report, ReportFormat format) {
  if (format == ReportFormat::CsvTable) {
    std::string out = "row,col,detector,score,context\r\n";
    for (const auto& f : report.flags) {
      out += std::to_string(f.addr.row);
      out += ',';
      out += std::to_string(f.addr.col);
      out += ',';
      out += detector_name(f.detector);
      out += ',';
      out += score_text(f.score);
      out += ',';
      out += csv_field(f.context);
      out += "\r\n";
    }
    return out;
  }

  const auto& p = report.params_echo;
  ojson doc;
  doc["params"] = {{"z_threshold", p.z_threshold},
                   {"window_radius", p.window_radius},
                   {"tab_min_run", p.tab_min_run},
                   {"series_axis", p.series_axis ? ojson(axis_name(*p.series_axis)) : ojson()}};
  doc["cells_scanned"] = report.cells_scanned;
  ojson flags = ojson::array();
  for (const auto& f : report.flags) {
    flags.push_back({{"row", f.addr.row},
                     {"col", f.addr.col},
                     {"detector", detector_name(f.detector)},
                     {"score", f.score},
                     {"context", f.context}});
  }
  doc["flags"] = std::move(flags);
  return doc.dump();
}

AnomalyReport parse_report_document(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw BadMessage(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    AnomalyReport report;
    const auto& p = doc.at("params");
    report.params_echo.z_threshold = p.at("z_threshold").get<double>();
    report.params_echo.window_radius = p.at("window_radius").get<std::size_t>();
    report.params_echo.tab_min_run = p.at("tab_min_run").get<std::size_t>();
    const auto& axis = p.at("series_axis");
    if (!axis.is_null()) {
      const auto name = axis.get<std::string>();
      report.params_echo.series_axis = parse_axis(name);
      if (!report.params_echo.series_axis) throw BadMessage("unknown series axis " + name);
    }
    report.cells_scanned = doc.at("cells_scanned").get<std::size_t>();
    for (const auto& f : doc.at("flags")) {
      auto detector = parse_detector(f.at("detector").get<std::string>());
      if (!detector) throw BadMessage("unknown detector");
      report.flags.push_back({{f.at("row").get<std::size_t>(), f.at("col").get<std::size_t>()},
                              *detector,
                              f.at("score").get<double>(),
                              f.at("context").get<std::string>()});
    }
    return report;
  } catch (const ojson::exception& e) {
    throw BadMessage(std::string("malformed report document: ") + e.what());
  }
}

}  // namespace sheetscape
