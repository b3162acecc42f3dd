#pragma once

// Per-frame weather feature vector.
//
// Layout (1-based names, 0-based storage):
//   f1..f3   point count per echo N1, N2, N3
//   f4..f6   mean range per echo
//   f7, f8   mean and variance of the echo number
//   f9       mean range over all points
//   f10      mean azimuth
//   f11      mean elevation
//   f12      variance of the pulse measure (intensity or epw)
//   f13      mean of the pulse measure
//   f14..f16 eigenvalues of the xyz covariance, descending
//
// Components whose defining point set is empty are set to 0 and flagged in
// the mask.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lidarwx/core.hpp"
#include "lidarwx/stats.hpp"

namespace lidarwx {

inline constexpr std::size_t kFeatureCount = 16;

enum FeatureIndex : std::size_t {
  kN1 = 0,
  kN2,
  kN3,
  kMeanRange1,
  kMeanRange2,
  kMeanRange3,
  kMeanEcho,
  kVarEcho,
  kMeanRange,
  kMeanAzimuth,
  kMeanElevation,
  kVarPulse,
  kMeanPulse,
  kEigen1,
  kEigen2,
  kEigen3,
};

struct FeatureVector {
  std::array<double, kFeatureCount> f{};
  std::array<bool, kFeatureCount> mask{};

  double operator[](std::size_t i) const { return f[i]; }

  bool fully_masked() const {
    for (bool m : mask)
      if (!m) return false;
    return true;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class SpreadMode : std::uint8_t {
  joint_eigenvalues,  // sorted eigenvalues of the 3x3 covariance of (x, y, z)
  axis_variances,     // var(x), var(y), var(z) in axis order
};

struct FeatureOptions {
  RoiBounds roi{};
  bool apply_roi = true;
  SpreadMode spread = SpreadMode::joint_eigenvalues;

  friend bool operator==(const FeatureOptions&, const FeatureOptions&) = default;
};

inline std::array<std::size_t, 3> echo_counts(const Frame& frame) {
  std::array<std::size_t, 3> n{};
  for (const Point& p : frame.points) {
    if (p.echo >= 1 && p.echo <= 3) ++n[p.echo - 1];
  }
  return n;
}

struct MaskedValue {
  double value = 0.0;
  bool masked = true;
};

/// Mean range over the points carrying echo number `echo` (1..3).
inline MaskedValue mean_range_per_echo(const Frame& frame, int echo) {
  RunningMoments m;
  for (const Point& p : frame.points) {
    if (p.echo == echo) m.add(p.r);
  }
  if (m.count() == 0) return {};
  return {m.mean(), false};
}

inline Eigen::Matrix3d point_covariance(std::span<const Point> points) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Point& p : points) mean += Eigen::Vector3d(p.x, p.y, p.z);
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Point& p : points) {
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
    cov.noalias() += d * d.transpose();
  }
  return cov / static_cast<double>(points.size());
}

struct Eigenvalues3 {
  std::array<double, 3> values{};  // descending, clamped at 0
  bool masked = true;
};

inline Eigenvalues3 covariance_eigenvalues(const Frame& frame) {
  if (frame.points.empty()) return {};
  const Eigen::Matrix3d cov = point_covariance(frame.points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = solver.eigenvalues();  // ascending
  Eigenvalues3 out;
  out.masked = false;
  for (int i = 0; i < 3; ++i) out.values[i] = std::max(0.0, ev[2 - i]);
  // n points span at most n - 1 dimensions.
  for (std::size_t i = frame.points.size() > 0 ? frame.points.size() - 1 : 0; i < 3; ++i) out.values[i] = 0.0;
  return out;
}

/// Computes the 16 features of `frame`, after ROI filtering unless disabled.
inline FeatureVector extract_features(const Frame& frame, const FeatureOptions& opts = {}) {
  const Frame filtered = opts.apply_roi ? roi_filter(frame, opts.roi) : frame;
  FeatureVector fv;
  if (filtered.points.empty()) {
    fv.mask.fill(true);
    return fv;
  }

  std::array<RunningMoments, 3> range_by_echo;
  RunningMoments echo, range, azimuth, elevation, pulse;
  for (const Point& p : filtered.points) {
    if (p.echo >= 1 && p.echo <= 3) range_by_echo[p.echo - 1].add(p.r);
    echo.add(p.echo);
    range.add(p.r);
    azimuth.add(p.phi);
    elevation.add(p.theta);
    pulse.add(p.pulse);
  }

  for (std::size_t t = 0; t < 3; ++t) {
    fv.f[kN1 + t] = static_cast<double>(range_by_echo[t].count());
    const bool empty = range_by_echo[t].count() == 0;
    fv.mask[kMeanRange1 + t] = empty;
    fv.f[kMeanRange1 + t] = empty ? 0.0 : range_by_echo[t].mean();
  }
  fv.f[kMeanEcho] = echo.mean();
  fv.f[kVarEcho] = echo.variance();
  fv.f[kMeanRange] = range.mean();
  fv.f[kMeanAzimuth] = azimuth.mean();
  fv.f[kMeanElevation] = elevation.mean();
  fv.f[kVarPulse] = pulse.variance();
  fv.f[kMeanPulse] = pulse.mean();

  if (opts.spread == SpreadMode::joint_eigenvalues) {
    const Eigenvalues3 ev = covariance_eigenvalues(filtered);
    for (std::size_t i = 0; i < 3; ++i) fv.f[kEigen1 + i] = ev.values[i];
  } else {
    const Eigen::Matrix3d cov = point_covariance(filtered.points);
    for (std::size_t i = 0; i < 3; ++i)
      fv.f[kEigen1 + i] = std::max(0.0, cov(static_cast<int>(i), static_cast<int>(i)));
  }
  return fv;
}

}  // namespace lidarwx
