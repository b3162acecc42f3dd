#pragma once

// Random inputs shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lidarwx/lidarwx.hpp"
#include "oracles/feature_oracle.hpp"

namespace support {

using lidarwx::Frame;
using lidarwx::Point;
using lidarwx::Rng;

/// A frame with up to `max_points` points spread over and around the default
/// ROI, random echoes and pulses.
inline Frame random_frame(Rng& rng, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> count(0, max_points);
  std::uniform_real_distribution<double> ux(-5.0, 30.0), uy(-4.0, 4.0), uz(-2.0, 3.0),
      upulse(0.0, 100.0);
  std::uniform_int_distribution<int> uecho(1, 3);
  Frame f;
  f.k = rng() % 100000;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    f.points.push_back(lidarwx::make_point(x, y, z, uecho(rng), upulse(rng)));
  }
  return f;
}

/// Points confined to the default ROI, so every point enters the features.
inline Frame random_roi_frame(Rng& rng, std::size_t min_points, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> count(min_points, max_points);
  std::uniform_real_distribution<double> ux(0.5, 20.0), uy(-1.5, 1.5), uz(-1.5, 2.0),
      upulse(0.0, 50.0);
  std::uniform_int_distribution<int> uecho(1, 3);
  Frame f;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i)
    f.points.push_back(lidarwx::make_point(ux(rng), uy(rng), uz(rng), uecho(rng), upulse(rng)));
  return f;
}

inline std::vector<oracle::RawPoint> raw(const Frame& f) {
  std::vector<oracle::RawPoint> out;
  for (const Point& p : f.points) out.push_back({p.x, p.y, p.z, p.r, p.theta, p.phi, p.echo, p.pulse});
  return out;
}

inline double rel_err(long double got, long double want) {
  const long double scale = std::max(std::abs(got), std::abs(want));
  if (scale == 0) return 0.0;
  return static_cast<double>(std::abs(got - want) / scale);
}

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

/// Isotropic Gaussian blobs, `per_class` samples each, centres `spacing`
/// apart along distinct axes.
inline Dataset blobs(Rng& rng, int classes, std::size_t per_class, std::size_t dim, double spacing,
                     double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  Dataset d;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> v(dim);
      for (double& t : v) t = g(rng);
      v[static_cast<std::size_t>(c) % dim] += spacing;
      d.x.push_back(std::move(v));
      d.y.push_back(c);
    }
  }
  return d;
}

/// Random labeled points; with `lattice` set, coordinates take few integer
/// values so distance and vote ties are frequent.
inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dim, int classes, bool lattice) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> u(0, 2), lab(0, classes - 1);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (double& t : v) t = lattice ? u(rng) : g(rng);
    d.x.push_back(std::move(v));
    d.y.push_back(lab(rng));
  }
  return d;
}

}  // namespace support
