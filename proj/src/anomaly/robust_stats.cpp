#include "anomaly/robust_stats.hpp"

#include "sheetscape/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sheetscape {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return (lower + upper) / 2.0;
}

namespace detail {

RobustCenter robust_center(std::span<const double> values) {
  RobustCenter out;
  out.median = median({values.begin(), values.end()});
  std::vector<double> dev;
  dev.reserve(values.size());
  double largest = 0.0;
  double sum = 0.0;
  for (double v : values) {
    const double d = std::fabs(v - out.median);
    dev.push_back(d);
    largest = std::max(largest, d);
    sum += d;
  }
  const double floor =
      kRelativeSpreadFloor * std::max(std::fabs(out.median), largest);
  const double mad = median(std::move(dev));
  if (mad > floor) {
    out.scale = kMadScale * mad;
    return out;
  }
  const double mean_dev = sum / static_cast<double>(values.size());
  if (mean_dev > floor) out.scale = kMeanAbsDevScale * mean_dev;
  return out;
}

}  // namespace detail

std::vector<double> robust_zscores(std::span<const double> series) {
  if (series.size() < 3) {
    throw SeriesTooShort("robust z-scores need at least 3 values, got " +
                         std::to_string(series.size()));
  }
  const auto center = detail::robust_center(series);
  std::vector<double> z;
  z.reserve(series.size());
  for (double v : series) z.push_back(center.score(v));
  return z;
}

}  // namespace sheetscape
