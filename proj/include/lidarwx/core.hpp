#pragma once

// Point and frame data model, coordinate conversion, region-of-interest
// filtering and echo partitioning.
//
// Sensor frame convention: x forward, y left, z up. Elevation `theta` is
// measured from the xy-plane (positive up), azimuth `phi` from +x towards +y.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/error.hpp"

namespace lidarwx {

inline constexpr double kPi = 3.14159265358979323846;

// Provenance tags carried by synthetic points. Points read from a sensor
// without provenance use kNoObject.
inline constexpr std::int32_t kNoObject = -1;
inline constexpr std::int32_t kAtmosphere = -2;
inline constexpr std::uint32_t kNoRay = 0xFFFFFFFFu;

struct Spherical {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

struct Cartesian {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Spherical spherical_from_cartesian(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return {};
  // Clamp guards asin against |z/r| exceeding 1 by one ulp.
  const double s = std::clamp(z / r, -1.0, 1.0);
  return {r, std::asin(s), std::atan2(y, x)};
}

inline Cartesian cartesian_from_spherical(double r, double theta, double phi) {
  const double c = std::cos(theta);
  return {r * c * std::cos(phi), r * c * std::sin(phi), r * std::sin(theta)};
}

/// One lidar return. `pulse` holds intensity or echo pulse width depending on
/// the frame's SensorDescriptor.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  std::uint8_t echo = 1;
  double pulse = 0.0;

  // Renderer provenance: ray index in the sensor grid, object id (or
  // kNoObject / kAtmosphere), retro-reflective surface flag.
  std::uint32_t ray = kNoRay;
  std::int32_t object = kNoObject;
  bool retro = false;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Builds a point from cartesian coordinates, filling in the spherical ones.
inline Point make_point(double x, double y, double z, int echo = 1, double pulse = 0.0) {
  const Spherical s = spherical_from_cartesian(x, y, z);
  Point p;
  p.x = x;
  p.y = y;
  p.z = z;
  p.r = s.r;
  p.theta = s.theta;
  p.phi = s.phi;
  p.echo = static_cast<std::uint8_t>(echo);
  p.pulse = pulse;
  return p;
}

inline Point make_point_spherical(double r, double theta, double phi, int echo = 1,
                                  double pulse = 0.0) {
  const Cartesian c = cartesian_from_spherical(r, theta, phi);
  Point p;
  p.x = c.x;
  p.y = c.y;
  p.z = c.z;
  p.r = r;
  p.theta = theta;
  p.phi = phi;
  p.echo = static_cast<std::uint8_t>(echo);
  p.pulse = pulse;
  return p;
}

inline bool is_valid(const Point& p) {
  if (p.echo < 1 || p.echo > 3) return false;
  if (!(p.pulse >= 0.0) || !(p.r >= 0.0)) return false;
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  return std::abs(r - p.r) <= 1e-6;
}

enum class PulseKind : std::uint8_t { intensity = 0, epw = 1 };

inline std::string_view to_string(PulseKind k) {
  return k == PulseKind::intensity ? "intensity" : "epw";
}

/// Azimuth/elevation scan pattern. Ray index = elevation_index * azimuth_count
/// + azimuth_index.
struct RayGrid {
  double azimuth_min = 0.0;  // rad
  double azimuth_max = 0.0;  // rad
  std::uint32_t azimuth_count = 0;
  std::vector<double> elevations;  // rad

  std::uint32_t ray_count() const {
    return azimuth_count * static_cast<std::uint32_t>(elevations.size());
  }

  double azimuth(std::uint32_t az_index) const {
    if (azimuth_count <= 1) return azimuth_min;
    return azimuth_min +
           (azimuth_max - azimuth_min) * static_cast<double>(az_index) / (azimuth_count - 1);
  }

  /// (elevation, azimuth) of a ray.
  std::pair<double, double> angles(std::uint32_t ray) const {
    return {elevations.at(ray / azimuth_count), azimuth(ray % azimuth_count)};
  }

  Cartesian direction(std::uint32_t ray) const {
    const auto [el, az] = angles(ray);
    return cartesian_from_spherical(1.0, el, az);
  }

  friend bool operator==(const RayGrid&, const RayGrid&) = default;
};

struct SensorDescriptor {
  PulseKind pulse_kind = PulseKind::intensity;
  std::uint8_t max_echoes = 3;  // 2 (strongest + last) or 3 (distance ordered)
  RayGrid grid;                 // empty for sensors without a known scan pattern

  friend bool operator==(const SensorDescriptor&, const SensorDescriptor&) = default;
};

struct Frame {
  std::uint64_t k = 0;
  std::vector<Point> points;
  SensorDescriptor sensor;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct RoiBounds {
  double x_max = 20.0;
  double y_min = -1.5;
  double y_max = 1.5;

  void validate() const {
    if (!(x_max > 0.0)) throw InvalidArgument("ROI x_max must be positive");
    if (!(y_min < y_max)) throw InvalidArgument("ROI requires y_min < y_max");
  }

  bool contains(const Point& p) const {
    return p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend bool operator==(const RoiBounds&, const RoiBounds&) = default;
};

inline Frame roi_filter(const Frame& frame, const RoiBounds& roi) {
  Frame out;
  out.k = frame.k;
  out.sensor = frame.sensor;
  out.points.reserve(frame.points.size());
  for (const Point& p : frame.points) {
    if (roi.contains(p)) out.points.push_back(p);
  }
  return out;
}

/// Points split by echo number; index 0 holds echo 1.
using EchoPartition = std::array<std::vector<Point>, 3>;

inline EchoPartition partition_by_echo(const Frame& frame) {
  EchoPartition parts;
  for (const Point& p : frame.points) {
    if (p.echo >= 1 && p.echo <= 3) parts[p.echo - 1].push_back(p);
  }
  return parts;
}

// Weather classes, numbered as in the reporting tables (1 clear, 2 rain, 3 fog).
enum class WeatherLabel : std::uint8_t { clear = 1, rain = 2, fog = 3 };

inline constexpr std::array<WeatherLabel, 3> kAllLabels = {WeatherLabel::clear,
                                                           WeatherLabel::rain, WeatherLabel::fog};

inline std::string_view to_string(WeatherLabel l) {
  switch (l) {
    case WeatherLabel::clear: return "clear";
    case WeatherLabel::rain: return "rain";
    case WeatherLabel::fog: return "fog";
  }
  return "?";
}

inline WeatherLabel parse_label(std::string_view s) {
  if (s == "clear" || s == "1") return WeatherLabel::clear;
  if (s == "rain" || s == "2") return WeatherLabel::rain;
  if (s == "fog" || s == "3") return WeatherLabel::fog;
  throw InvalidArgument("unknown weather label '" + std::string(s) + "'");
}

/// Zero-based class index (clear 0, rain 1, fog 2).
inline int label_index(WeatherLabel l) { return static_cast<int>(l) - 1; }
inline WeatherLabel label_from_index(int i) {
  if (i < 0 || i > 2) throw InvalidArgument("class index out of range");
  return static_cast<WeatherLabel>(i + 1);
}

struct GroundTruth {
  WeatherLabel label = WeatherLabel::clear;
  std::optional<double> visibility;     // m
  std::optional<double> rainfall_rate;  // mm/h

  void validate() const {
    if (label == WeatherLabel::fog && !visibility)
      throw InvalidArgument("fog ground truth requires a visibility");
    if (label == WeatherLabel::rain && !rainfall_rate)
      throw InvalidArgument("rain ground truth requires a rainfall rate");
  }

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

}  // namespace lidarwx
