#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "espin/core.hpp"

namespace espin::stats {

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
/// `sorted` must be ascending and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("empty_input", "quantile of empty sample");
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double mean(std::span<const double> v) {
  if (v.empty()) return kNaN;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for n < 2.
inline double sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Summary {
  std::size_t n = 0;
  double mean = kNaN;
  double std_dev = 0.0;
  double q1 = kNaN;
  double median = kNaN;
  double q3 = kNaN;
  /// Standardized third central moment; empty when the sample is constant.
  std::optional<double> skewness;
  /// Standardized fourth central moment minus 3; empty when the sample is constant.
  std::optional<double> excess_kurtosis;
};

inline Summary summarize(std::vector<double> values) {
  if (values.empty()) throw Error("empty_input", "summary of empty sample");
  std::sort(values.begin(), values.end());
  Summary s;
  s.n = values.size();
  s.mean = mean(values);
  s.std_dev = sd(values);
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  if (values.front() == values.back()) {
    s.std_dev = 0.0;
    return s;
  }
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : values) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(s.n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.skewness = m3 / std::pow(m2, 1.5);
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return s;
}

}  // namespace espin::stats
