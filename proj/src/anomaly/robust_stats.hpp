#pragma once

#include "sheetscape/anomaly.hpp"

#include <cmath>
#include <span>

namespace sheetscape::detail {

/// Median and Gaussian-consistent spread of a sample. scale is 0 when the
/// sample has no usable spread.
struct RobustCenter {
  double median = 0.0;
  double scale = 0.0;

  double score(double v) const { return scale > 0.0 ? std::fabs(v - median) / scale : 0.0; }
};

RobustCenter robust_center(std::span<const double> values);

}  // namespace sheetscape::detail
