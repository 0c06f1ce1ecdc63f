#include "anomaly/robust_stats.hpp"

#include "sheetscape/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace sheetscape {

std::string_view axis_name(SeriesAxis axis) {
  return axis == SeriesAxis::Rows ? "rows" : "cols";
}

std::optional<SeriesAxis> parse_axis(std::string_view name) {
  if (name == "rows") return SeriesAxis::Rows;
  if (name == "cols") return SeriesAxis::Columns;
  return std::nullopt;
}

std::string_view detector_name(Detector detector) {
  switch (detector) {
    case Detector::Fin: return "fin";
    case Detector::Tab: return "tab";
    case Detector::Discontinuity: return "discontinuity";
    case Detector::Missing: return "missing";
  }
  return "fin";
}

std::optional<Detector> parse_detector(std::string_view name) {
  for (auto d : {Detector::Fin, Detector::Tab, Detector::Discontinuity, Detector::Missing}) {
    if (detector_name(d) == name) return d;
  }
  return std::nullopt;
}

void DetectorParams::validate() const {
  if (!(z_threshold > 0.0)) throw std::invalid_argument("z_threshold must be positive");
  if (window_radius < 1) throw std::invalid_argument("window_radius must be at least 1");
  if (tab_min_run < 2) throw std::invalid_argument("tab_min_run must be at least 2");
}

SeriesAxis resolve_axis(const DetectorParams& params, const GridView& view) {
  if (params.series_axis) return *params.series_axis;
  return view.n_rows() > view.n_cols() ? SeriesAxis::Columns : SeriesAxis::Rows;
}

namespace {

// One row or column of the view, as positions along the series.
struct Series {
  std::string label;  // "row 3" / "col 7"
  std::vector<CellAddress> addrs;
  std::vector<const Cell*> cells;

  bool numeric(std::size_t i) const { return cells[i]->value.is_number(); }
  double value(std::size_t i) const { return cells[i]->value.as_number(); }
};

template <typename F>
void for_each_series(const GridView& view, SeriesAxis axis, F&& f) {
  const CellRange& r = view.range();
  const bool rows = axis == SeriesAxis::Rows;
  const std::size_t outer_lo = rows ? r.top : r.left;
  const std::size_t outer_hi = rows ? r.bottom : r.right;
  const std::size_t inner_lo = rows ? r.left : r.top;
  const std::size_t inner_hi = rows ? r.right : r.bottom;
  Series s;
  for (std::size_t o = outer_lo; o <= outer_hi; ++o) {
    s.label = (rows ? "row " : "col ") + std::to_string(o);
    s.addrs.clear();
    s.cells.clear();
    for (std::size_t i = inner_lo; i <= inner_hi; ++i) {
      const CellAddress a = rows ? CellAddress{o, i} : CellAddress{i, o};
      s.addrs.push_back(a);
      s.cells.push_back(&view.at(a));
    }
    f(s);
  }
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<AnomalyFlag> detect_fins(const GridView& view, const DetectorParams& params) {
  params.validate();
  std::vector<AnomalyFlag> flags;
  const std::size_t radius = params.window_radius;
  std::vector<double> window;
  for_each_series(view, resolve_axis(params, view), [&](const Series& s) {
    const std::size_t n = s.cells.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!s.numeric(i)) continue;
      const std::size_t lo = i >= radius ? i - radius : 0;
      const std::size_t hi = std::min(n - 1, i + radius);
      window.clear();
      for (std::size_t k = lo; k <= hi; ++k) {
        if (s.numeric(k)) window.push_back(s.value(k));
      }
      if (window.size() < 3) continue;
      const auto center = detail::robust_center(window);
      const double z = center.score(s.value(i));
      if (z < params.z_threshold) continue;
      const bool left_hot = i > lo && s.numeric(i - 1) &&
                            center.score(s.value(i - 1)) >= params.z_threshold;
      const bool right_hot = i < hi && s.numeric(i + 1) &&
                             center.score(s.value(i + 1)) >= params.z_threshold;
      if (left_hot || right_hot) continue;  // a level shift, not a spike
      flags.push_back({s.addrs[i], Detector::Fin, z,
                       s.label + ": " + fmt_num(s.value(i)) + " vs window median " +
                           fmt_num(center.median)});
    }
  });
  return flags;
}

std::vector<AnomalyFlag> detect_tabs(const GridView& view, const DetectorParams& params) {
  params.validate();
  std::vector<AnomalyFlag> flags;
  for_each_series(view, resolve_axis(params, view), [&](const Series& s) {
    const std::size_t n = s.cells.size();
    std::set<double> distinct;
    for (std::size_t i = 0; i < n && distinct.size() < 2; ++i) {
      if (s.numeric(i)) distinct.insert(s.value(i));
    }
    if (distinct.size() < 2) return;

    std::size_t i = 0;
    while (i < n) {
      const Cell& c = *s.cells[i];
      std::size_t j = i + 1;
      if (c.value.is_number()) {
        while (j < n && s.numeric(j) && s.value(j) == c.value.as_number()) ++j;
      } else if (c.value.is_empty()) {
        while (j < n && s.cells[j]->value.is_empty()) ++j;
      }
      const std::size_t len = j - i;
      if (!c.value.is_text() && len >= params.tab_min_run) {
        const bool missing = c.value.is_empty();
        flags.push_back({s.addrs[i], missing ? Detector::Missing : Detector::Tab,
                         static_cast<double>(len),
                         s.label + ": " + std::to_string(len) +
                             (missing ? " empty cells"
                                      : " repeats of " + fmt_num(c.value.as_number()))});
      }
      i = j;
    }
  });
  return flags;
}

std::vector<AnomalyFlag> detect_discontinuities(const GridView& view,
                                                const DetectorParams& params) {
  params.validate();
  std::vector<AnomalyFlag> flags;
  std::vector<double> diffs;
  std::vector<std::size_t> left;
  for_each_series(view, resolve_axis(params, view), [&](const Series& s) {
    const std::size_t n = s.cells.size();
    if (n < 4) return;
    diffs.clear();
    left.clear();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (s.numeric(i) && s.numeric(i + 1)) {
        diffs.push_back(s.value(i + 1) - s.value(i));
        left.push_back(i);
      }
    }
    if (diffs.size() < 3) return;
    const auto z = robust_zscores(diffs);
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (z[k] >= params.z_threshold) {
        flags.push_back({s.addrs[left[k]], Detector::Discontinuity, z[k],
                         s.label + ": jump of " + fmt_num(diffs[k])});
      }
    }
  });
  return flags;
}

void canonicalize_flags(std::vector<AnomalyFlag>& flags) {
  // Highest score first within each (addr, detector) so the keeper survives
  // the de-duplication pass.
  std::sort(flags.begin(), flags.end(), [](const AnomalyFlag& a, const AnomalyFlag& b) {
    if (a.detector != b.detector) return a.detector < b.detector;
    if (a.addr != b.addr) return a.addr < b.addr;
    return a.score > b.score;
  });
  flags.erase(std::unique(flags.begin(), flags.end(),
                          [](const AnomalyFlag& a, const AnomalyFlag& b) {
                            return a.detector == b.detector && a.addr == b.addr;
                          }),
              flags.end());
  std::sort(flags.begin(), flags.end(), [](const AnomalyFlag& a, const AnomalyFlag& b) {
    if (a.detector != b.detector) return a.detector < b.detector;
    if (a.score != b.score) return a.score > b.score;
    return a.addr < b.addr;
  });
}

AnomalyReport run_report(const GridView& view, const DetectorParams& params) {
  params.validate();
  AnomalyReport report;
  report.params_echo = params;
  report.params_echo.series_axis = resolve_axis(params, view);
  view.for_each([&](const CellAddress&, const Cell& c) {
    if (c.value.is_number()) ++report.cells_scanned;
  });
  report.flags = detect_fins(view, params);
  for (auto* detect : {&detect_tabs, &detect_discontinuities}) {
    auto more = detect(view, params);
    report.flags.insert(report.flags.end(), std::make_move_iterator(more.begin()),
                        std::make_move_iterator(more.end()));
  }
  canonicalize_flags(report.flags);
  return report;
}

}  // namespace sheetscape
