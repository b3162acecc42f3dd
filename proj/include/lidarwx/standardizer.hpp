#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lidarwx/error.hpp"

namespace lidarwx {

/// Per-feature z-scoring with training-set statistics. Features that are
/// constant in training are centred but not scaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> constant;

  static constexpr double kConstantTolerance = 1e-12;

  std::size_t dimension() const { return mean.size(); }

  /// Fits on row-major samples. Column sums run over sorted values, so the
  /// result does not depend on the sample order.
  static Standardizer fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidArgument("Standardizer::fit: no samples");
    const std::size_t dim = rows.front().size();
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 1.0);
    s.constant.assign(dim, false);
    std::vector<double> col(rows.size());
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) throw InvalidArgument("Standardizer::fit: ragged rows");
        col[i] = rows[i][j];
      }
      std::sort(col.begin(), col.end());
      double sum = 0.0;
      for (double v : col) sum += v;
      const double m = sum / static_cast<double>(col.size());
      double ss = 0.0;
      for (double v : col) ss += (v - m) * (v - m);
      const double sd = std::sqrt(ss / static_cast<double>(col.size()));
      s.mean[j] = m;
      if (sd <= kConstantTolerance * std::max(1.0, std::abs(m))) {
        s.constant[j] = true;
        s.stddev[j] = 1.0;
      } else {
        s.stddev[j] = sd;
      }
    }
    return s;
  }

  std::vector<double> transform(std::span<const double> x) const {
    if (x.size() != mean.size()) throw InvalidArgument("Standardizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / stddev[j];
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    d += t * t;
  }
  return d;
}

}  // namespace lidarwx
