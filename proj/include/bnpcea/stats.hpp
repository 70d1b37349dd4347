#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace bnpcea {

// Linear-interpolation quantile (R type 7) of an unsorted sample.
inline double quantile(std::span<const double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("quantile of empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline double mean(std::span<const double> sample) {
  double acc = 0.0;
  for (double v : sample) acc += v;
  return sample.empty() ? 0.0 : acc / static_cast<double>(sample.size());
}

inline double variance(std::span<const double> sample) {
  if (sample.size() < 2) return 0.0;
  const double m = mean(sample);
  double acc = 0.0;
  for (double v : sample) acc += (v - m) * (v - m);
  return acc / static_cast<double>(sample.size() - 1);
}

}  // namespace bnpcea
