#pragma once

#include "sheetscape/grid.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheetscape {

enum class SeriesAxis { Rows, Columns };

std::string_view axis_name(SeriesAxis axis);  // "rows" / "cols"
std::optional<SeriesAxis> parse_axis(std::string_view name);

struct DetectorParams {
  double z_threshold = 3.5;
  std::size_t window_radius = 5;
  std::size_t tab_min_run = 5;
  /// Unset: series run along the longer side of the view (columns when the
  /// view is taller than wide).
  std::optional<SeriesAxis> series_axis;

  /// Throws std::invalid_argument on a non-positive threshold, a zero
  /// radius or a run length below 2.
  void validate() const;

  friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

SeriesAxis resolve_axis(const DetectorParams& params, const GridView& view);

enum class Detector { Fin, Tab, Discontinuity, Missing };

std::string_view detector_name(Detector detector);
std::optional<Detector> parse_detector(std::string_view name);

struct AnomalyFlag {
  CellAddress addr;
  Detector detector = Detector::Fin;
  double score = 0.0;
  std::string context;

  friend bool operator==(const AnomalyFlag&, const AnomalyFlag&) = default;
};

struct AnomalyReport {
  std::vector<AnomalyFlag> flags;  // by detector, then score descending
  DetectorParams params_echo;
  std::size_t cells_scanned = 0;

  friend bool operator==(const AnomalyReport&, const AnomalyReport&) = default;
};

/// Consistency constants that put the spread estimates on the scale of a
/// Gaussian standard deviation.
inline constexpr double kMadScale = 1.4826;
inline constexpr double kMeanAbsDevScale = 1.253314;

/// Spread below this fraction of the series magnitude counts as zero, so
/// that rounding noise in nearly constant data does not produce huge scores.
inline constexpr double kRelativeSpreadFloor = 1e-12;

double median(std::vector<double> values);

/// |v - median| / (1.4826 * MAD). When the MAD is zero the mean absolute
/// deviation around the median (scaled by 1.253314) is used instead; when
/// that is zero too, every score is 0. Throws SeriesTooShort below 3 values.
std::vector<double> robust_zscores(std::span<const double> series);

/// Isolated windowed outliers: robust z within a window of window_radius
/// cells each side (shrunk at series ends) reaches the threshold while both
/// immediate neighbours stay below it in the same window.
std::vector<AnomalyFlag> detect_fins(const GridView& view, const DetectorParams& params);

/// Maximal runs of tab_min_run or more identical numbers (Tab) or Empty
/// cells (Missing) in series that have at least two distinct values.
/// The flag sits at the run start; the score is the run length.
std::vector<AnomalyFlag> detect_tabs(const GridView& view, const DetectorParams& params);

/// Robust z of first differences between adjacent numeric cells; flags the
/// left cell of each outlying jump. Series shorter than 4 are skipped.
std::vector<AnomalyFlag> detect_discontinuities(const GridView& view,
                                                const DetectorParams& params);

/// All detectors, de-duplicated by (addr, detector) and sorted.
AnomalyReport run_report(const GridView& view, const DetectorParams& params = {});

/// Sorts by (detector, score descending, row, col) and drops repeated
/// (addr, detector) pairs, keeping the highest score.
void canonicalize_flags(std::vector<AnomalyFlag>& flags);

}  // namespace sheetscape
