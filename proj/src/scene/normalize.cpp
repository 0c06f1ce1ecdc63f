#include "sheetscape/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sheetscape {

double scaled_height(double value, const GroupBounds& group,
                     const NormalizationPolicy& policy) {
  const double h_max = policy.height_max;
  if (group.v_max == group.v_min) return h_max / 2.0;
  if (policy.signed_baseline && group.v_min < 0.0 && group.v_max > 0.0) {
    const double extent = std::max(std::fabs(group.v_min), std::fabs(group.v_max));
    return h_max * (value / extent);
  }
  const double span = group.v_max - group.v_min;
  if (!std::isfinite(span)) {
    return h_max * ((value / 2 - group.v_min / 2) / (group.v_max / 2 - group.v_min / 2));
  }
  return h_max * ((value - group.v_min) / span);
}

std::optional<std::size_t> group_index(const PolicyEcho& echo, FormatCategory category) {
  if (echo.policy.mode == NormalizationMode::Uniform) {
    if (echo.groups.empty()) return std::nullopt;
    return 0;
  }
  for (std::size_t i = 0; i < echo.groups.size(); ++i) {
    if (echo.groups[i].category == category) return i;
  }
  return std::nullopt;
}

Normalization normalize(std::span<const NormalizeInput> values,
                        const NormalizationPolicy& policy) {
  const bool per_format = policy.mode == NormalizationMode::PerFormatGroup;
  std::array<GroupBounds, kFormatCategoryCount> acc{};
  for (const auto& v : values) {
    auto& g = acc[per_format ? static_cast<std::size_t>(v.category) : 0];
    if (g.count == 0) {
      g.v_min = g.v_max = v.value;
    } else {
      g.v_min = std::min(g.v_min, v.value);
      g.v_max = std::max(g.v_max, v.value);
    }
    ++g.count;
  }

  Normalization out;
  std::array<std::size_t, kFormatCategoryCount> slot{};
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i].count == 0) continue;
    if (per_format) acc[i].category = static_cast<FormatCategory>(i);
    slot[i] = out.groups.size();
    out.groups.push_back(acc[i]);
  }

  out.heights.reserve(values.size());
  for (const auto& v : values) {
    const auto& g = out.groups[slot[per_format ? static_cast<std::size_t>(v.category) : 0]];
    out.heights.push_back({v.addr, scaled_height(v.value, g, policy)});
  }
  return out;
}

}  // namespace sheetscape
