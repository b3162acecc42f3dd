#pragma once

// Geometric-primitive scenes and ray casting for the synthetic channel.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lidarwx/core.hpp"

namespace lidarwx {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Infinite plane {p : normal . p = offset}.
struct Plane {
  Vec3 normal{0.0, 0.0, 1.0};
  double offset = 0.0;
  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Axis-aligned box.
struct Box {
  Vec3 center;
  Vec3 size{1.0, 1.0, 1.0};
  friend bool operator==(const Box&, const Box&) = default;
};

/// Vertical cylinder (axis parallel to z), no end caps.
struct Cylinder {
  Vec3 base;  // bottom centre
  double radius = 0.5;
  double height = 1.0;
  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

using Shape = std::variant<Plane, Box, Cylinder>;

struct Motion {
  Vec3 velocity;        // m/s
  double period = 0.0;  // s; motion restarts every period (0 = unbounded)

  Vec3 offset(double t) const {
    const double tau = period > 0.0 ? std::fmod(t, period) : t;
    return tau * velocity;
  }
  friend bool operator==(const Motion&, const Motion&) = default;
};

struct SceneObject {
  std::int32_t id = 0;
  std::string name;
  Shape shape;
  double reflectivity = 0.5;
  bool retro = false;
  Motion motion;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SceneSpec {
  std::string scenario_id;
  std::vector<SceneObject> objects;
  SensorDescriptor sensor;

  void validate() const {
    if (scenario_id.empty()) throw InvalidArgument("scene without scenario_id");
    for (const auto& o : objects) {
      if (!(o.reflectivity >= 0.0 && o.reflectivity <= 1.0))
        throw InvalidArgument("object '" + o.name + "' reflectivity outside [0,1]");
    }
  }
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMinHit = 1e-6;

inline double intersect(const Plane& pl, Vec3 shift, Vec3 dir) {
  const double denom = dot(pl.normal, dir);
  if (std::abs(denom) < 1e-12) return kInf;
  const double t = (pl.offset + dot(pl.normal, shift)) / denom;
  return t > kMinHit ? t : kInf;
}

inline double intersect(const Box& b, Vec3 shift, Vec3 dir) {
  const Vec3 c = b.center + shift;
  const double lo[3] = {c.x - b.size.x / 2, c.y - b.size.y / 2, c.z - b.size.z / 2};
  const double hi[3] = {c.x + b.size.x / 2, c.y + b.size.y / 2, c.z + b.size.z / 2};
  const double d[3] = {dir.x, dir.y, dir.z};
  double t0 = 0.0;
  double t1 = kInf;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (0.0 < lo[a] || 0.0 > hi[a]) return kInf;
      continue;
    }
    double ta = lo[a] / d[a];
    double tb = hi[a] / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return kInf;
  }
  return t0 > kMinHit ? t0 : kInf;
}

inline double intersect(const Cylinder& cy, Vec3 shift, Vec3 dir) {
  const Vec3 b = cy.base + shift;
  const double a = dir.x * dir.x + dir.y * dir.y;
  if (a < 1e-15) return kInf;
  const double bq = -2.0 * (dir.x * b.x + dir.y * b.y);
  const double cq = b.x * b.x + b.y * b.y - cy.radius * cy.radius;
  const double disc = bq * bq - 4.0 * a * cq;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  for (double t : {(-bq - sq) / (2.0 * a), (-bq + sq) / (2.0 * a)}) {
    if (t <= kMinHit) continue;
    const double z = t * dir.z;
    if (z >= b.z && z <= b.z + cy.height) return t;
  }
  return kInf;
}

}  // namespace detail

struct RayHit {
  double range = 0.0;
  const SceneObject* object = nullptr;
};

/// Nearest object hit along unit direction `dir` from the sensor origin at
/// time `t`, within `max_range`.
inline std::optional<RayHit> cast_ray(const SceneSpec& scene, Vec3 dir, double t,
                                      double max_range) {
  RayHit best{max_range, nullptr};
  for (const SceneObject& o : scene.objects) {
    const Vec3 shift = o.motion.offset(t);
    const double hit = std::visit([&](const auto& s) { return detail::intersect(s, shift, dir); },
                                  o.shape);
    if (hit < best.range) best = {hit, &o};
  }
  if (!best.object) return std::nullopt;
  return best;
}

}  // namespace lidarwx
