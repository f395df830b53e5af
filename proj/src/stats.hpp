#pragma once

// Small order-statistic helpers shared by several modules.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace rfplm {

// Linear-interpolation quantile (R type 7) of already sorted data.
inline double quantile_sorted(std::span<const double> sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

// Median absolute deviation normalized for consistency at the normal.
inline double normalized_mad(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  const double med = median(v);
  for (auto& x : v) x = std::abs(x - med);
  return median(std::move(v)) / 0.6745;
}

}  // namespace rfplm
