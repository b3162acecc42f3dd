#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lidarwx/error.hpp"

namespace lidarwx {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population (1/n)
};

// Welford accumulator. Population variance.
class RunningMoments {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ == 0 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n_)); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Mean and population variance of a non-empty sample. Throws on empty input;
/// callers mask the corresponding feature.
inline MeanVar attribute_mean_var(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("attribute_mean_var: empty input");
  RunningMoments m;
  for (double v : values) m.add(v);
  return {m.mean(), m.variance()};
}

/// Linear-interpolated quantile of sorted data (q in [0,1]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

/// Tukey boxplot summary (1.5 IQR whiskers).
struct BoxplotStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

inline BoxplotStats boxplot_stats(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("boxplot of empty sample");
  std::sort(values.begin(), values.end());
  BoxplotStats s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  bool have_low = false;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
      continue;
    }
    if (!have_low) {
      s.whisker_low = v;
      have_low = true;
    }
    s.whisker_high = v;
  }
  return s;
}

}  // namespace lidarwx
