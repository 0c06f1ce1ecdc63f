#include "sheetscape/cli.hpp"

#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"
#include "sheetscape/ingest.hpp"
#include "sheetscape/server.hpp"
#include "sheetscape/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sheetscape {

namespace {

// An input problem: missing file, unreadable workbook, bad range.
struct InputFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string in;
  std::string sheet;
  std::string delimiter = ",";
  std::string range;
  std::string mode = "bars";
  std::string normalize = "uniform";
  bool signed_baseline = false;
  double hmax = 1.0;
  double pitch = 1.0;
  std::string gltf;
  std::string scene_doc;
  std::string report;
  std::string report_format = "csv";
  double z = DetectorParams{}.z_threshold;
  std::string axis;
  std::size_t tab_run = DetectorParams{}.tab_min_run;
  std::size_t window = DetectorParams{}.window_radius;
  std::string host = "127.0.0.1";
  unsigned short port = 8080;
  std::string save_dir;
  std::size_t threads = 2;
};

std::vector<std::byte> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFailure("cannot read " + path + ": " + std::strerror(errno));
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw InputFailure("cannot read " + path);
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputFailure("cannot write " + path + ": " + std::strerror(errno));
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw InputFailure("cannot write " + path);
}

IngestOptions ingest_options(const Flags& f) {
  IngestOptions o;
  if (!f.sheet.empty()) o.sheet_name = f.sheet;
  if (f.delimiter == "\\t" || f.delimiter == "tab") {
    o.csv_delimiter = '\t';
  } else if (f.delimiter.size() == 1) {
    o.csv_delimiter = f.delimiter[0];
  } else {
    throw std::invalid_argument("--delimiter must be a single character");
  }
  return o;
}

CellRange view_range(const Flags& f, const CellGrid& grid) {
  if (f.range.empty()) return grid.full_range();
  auto r = parse_range(f.range);
  if (!r) throw std::invalid_argument("--range expects r,c:r,c, got " + f.range);
  return *r;
}

SceneConfig scene_config(const Flags& f) {
  SceneConfig c;
  c.glyph_mode = *parse_glyph_mode(f.mode);
  c.policy.mode = *parse_normalization_mode(f.normalize);
  c.policy.signed_baseline = f.signed_baseline;
  c.policy.height_max = f.hmax;
  c.cell_pitch = f.pitch;
  c.validate();
  return c;
}

DetectorParams detector_params(const Flags& f) {
  DetectorParams p;
  p.z_threshold = f.z;
  p.window_radius = f.window;
  p.tab_min_run = f.tab_run;
  if (!f.axis.empty()) p.series_axis = parse_axis(f.axis);
  p.validate();
  return p;
}

CellGrid load(const Flags& f) {
  const auto bytes = read_file(f.in);
  return read_workbook(bytes, ingest_options(f));
}

int run_ingest(const Flags& f, std::ostream& out) {
  const CellGrid grid = load(f);
  const GridView view = select_range(grid, view_range(f, grid));
  std::size_t numbers = 0, texts = 0, empties = 0, formatted = 0;
  std::array<std::size_t, kFormatCategoryCount> by_category{};
  view.for_each([&](const CellAddress&, const Cell& c) {
    if (c.value.is_number()) {
      ++numbers;
      ++by_category[static_cast<std::size_t>(c.format.category)];
    } else if (c.value.is_text()) {
      ++texts;
    } else {
      ++empties;
    }
    if (!c.format.is_default()) ++formatted;
  });
  out << "rows " << view.n_rows() << "\n"
      << "cols " << view.n_cols() << "\n"
      << "number " << numbers << "\n"
      << "text " << texts << "\n"
      << "empty " << empties << "\n"
      << "formatted " << formatted << "\n";
  for (std::size_t k = 0; k < kFormatCategoryCount; ++k) {
    if (by_category[k] == 0) continue;
    out << "number." << category_name(static_cast<FormatCategory>(k)) << " " << by_category[k]
        << "\n";
  }
  return kExitOk;
}

int run_scene(const Flags& f, std::ostream& out) {
  if (f.gltf.empty() && f.scene_doc.empty()) {
    throw std::invalid_argument("scene needs --gltf and/or --scene-doc");
  }
  const SceneConfig config = scene_config(f);
  const CellGrid grid = load(f);
  const SceneModel scene = build_scene(select_range(grid, view_range(f, grid)), config);
  if (!f.scene_doc.empty()) write_file(f.scene_doc, write_scene_document(scene));
  if (!f.gltf.empty()) {
    const auto glb = write_gltf(scene);
    write_file(f.gltf, {reinterpret_cast<const char*>(glb.data()), glb.size()});
  }
  std::array<std::size_t, 4> counts{};
  for (const auto& g : scene.glyphs) ++counts[static_cast<std::size_t>(g.kind)];
  out << "glyphs " << scene.glyphs.size() << " (bars " << counts[0] << ", tiles " << counts[1]
      << ", labels " << counts[2] << ", patches " << counts[3] << ")\n";
  return kExitOk;
}

int run_anomalies(const Flags& f, std::ostream& out) {
  const DetectorParams params = detector_params(f);
  const CellGrid grid = load(f);
  const AnomalyReport report = run_report(select_range(grid, view_range(f, grid)), params);
  const auto format = f.report_format == "doc" ? ReportFormat::Document : ReportFormat::CsvTable;
  std::string text = write_report(report, format);
  if (format == ReportFormat::Document) text += "\n";
  if (f.report.empty()) {
    out << text;
  } else {
    write_file(f.report, text);
    out << "flags " << report.flags.size() << "\n";
  }
  return kExitOk;
}

int run_serve(const Flags& f, std::ostream& out) {
  std::optional<std::filesystem::path> save_dir;
  if (!f.save_dir.empty()) save_dir = f.save_dir;
  SessionManager sessions(save_dir);
  ServerOptions options;
  options.address = f.host;
  options.port = f.port;
  options.threads = f.threads;
  options.handle_signals = true;
  Server server(sessions, options);
  unsigned short port = 0;
  try {
    port = server.start();
  } catch (const std::exception& e) {
    throw InputFailure("cannot listen on " + f.host + ":" + std::to_string(f.port) + ": " +
                       e.what());
  }
  out << "listening on http://" << f.host << ":" << port << std::endl;
  server.wait();
  return kExitOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Spreadsheet to 3D scene pipeline", "sheetscape"};
  app.require_subcommand(1);

  auto add_input = [&f](CLI::App* sub) {
    sub->add_option("--in", f.in, "Workbook path (.csv or .xlsx)")->required();
    sub->add_option("--sheet", f.sheet, "Worksheet name (XLSX)");
    sub->add_option("--delimiter", f.delimiter, "CSV field delimiter");
    sub->add_option("--range", f.range, "View rectangle r,c:r,c (0-based, inclusive)");
  };

  auto* ingest = app.add_subcommand("ingest", "Print grid dimensions and a cell-type census");
  add_input(ingest);

  auto* scene = app.add_subcommand("scene", "Build a scene and write glTF and/or a scene document");
  add_input(scene);
  scene->add_option("--mode", f.mode, "Glyph mode")->check(CLI::IsMember({"bars", "surface"}));
  scene->add_option("--normalize", f.normalize, "Normalization")
      ->check(CLI::IsMember({"uniform", "per-format"}));
  scene->add_flag("--signed", f.signed_baseline, "Signed baseline for groups straddling zero");
  scene->add_option("--hmax", f.hmax, "Maximum bar height");
  scene->add_option("--pitch", f.pitch, "Cell pitch");
  scene->add_option("--gltf", f.gltf, "Output .glb path");
  scene->add_option("--scene-doc", f.scene_doc, "Output scene document path");

  auto* anomalies = app.add_subcommand("anomalies", "Run the anomaly detectors");
  add_input(anomalies);
  anomalies->add_option("--z", f.z, "Robust z threshold");
  anomalies->add_option("--axis", f.axis, "Series axis")->check(CLI::IsMember({"rows", "cols"}));
  anomalies->add_option("--tab-run", f.tab_run, "Minimum stale run length");
  anomalies->add_option("--window", f.window, "Fin window radius");
  anomalies->add_option("--report", f.report, "Output path (stdout when omitted)");
  anomalies->add_option("--report-format", f.report_format, "Report format")
      ->check(CLI::IsMember({"csv", "doc"}));

  auto* serve = app.add_subcommand("serve", "Run the session server");
  serve->add_option("--host", f.host, "Bind address");
  serve->add_option("--port", f.port, "TCP port");
  serve->add_option("--save-dir", f.save_dir, "Write edited grids here on session close");
  serve->add_option("--threads", f.threads, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitUsageError;
  }

  try {
    if (ingest->parsed()) return run_ingest(f, out);
    if (scene->parsed()) return run_scene(f, out);
    if (anomalies->parsed()) return run_anomalies(f, out);
    return run_serve(f, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitUsageError;
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << one_line(e.what()) << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitInputError;
  }
}

}  // namespace sheetscape
