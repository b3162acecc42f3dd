#pragma once

// Simplified fog/rain lidar channel on top of the primitive ray caster.
//
// Constants in ChannelConfig are tuning knobs, not physical claims. Fog adds
// near-range backscatter and pushes object returns to later echoes; rain adds
// sparse droplet echoes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lidarwx/core.hpp"
#include "lidarwx/rng.hpp"
#include "lidarwx/scene.hpp"

namespace lidarwx {

struct ChannelConfig {
  // Clear-air return model: pulse = base_pulse * reflectivity * (reference_range / r)^2,
  // times retro_gain on retro-reflective surfaces.
  double base_pulse = 100.0;
  double reference_range = 10.0;  // m
  double retro_gain = 20.0;
  double detection_threshold = 0.5;
  double max_range = 120.0;           // m
  double range_noise_sigma = 0.02;    // m
  double pulse_noise_sigma = 0.05;    // relative

  // Fog: extinction alpha = koschmieder / V, two-way transmission exp(-2 alpha r).
  double koschmieder = 3.0;
  // Probability of each successive backscatter echo on a ray: 1 - exp(-gain * alpha).
  double fog_backscatter_gain = 13.4;
  int fog_max_points = 2;
  double fog_range_scale_divisor = 6.0;  // exponential scale = V / divisor
  double fog_range_min = 1.0;            // m
  double fog_range_max = 10.0;           // m
  double atmosphere_pulse = 0.8;
  // epw sensors: fog echo pulse width scales as (fog_epw_reference_visibility / V)^fog_epw_exponent.
  double fog_epw_reference_visibility = 40.0;
  double fog_epw_exponent = 1.0;
  double rain_epw_factor = 0.5;

  // Rain: extinction alpha = rain_extinction_per_mmh * R.
  double rain_extinction_per_mmh = 1e-4;
  double droplets_per_mmh = 2.0;  // expected droplet echoes per frame per mm/h
  double droplet_range_min = 0.5;
  double droplet_range_max = 15.0;
  double wet_pulse_jitter = 0.75;  // surface pulse multiplied by U(1 - jitter, 1)
  double rain_range_sigma = 0.03;

  double frame_period = 0.1;  // s between consecutive frames of a cell

  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
  double draw(Rng& rng) const {
    if (max <= min) return min;
    return std::uniform_real_distribution<double>(min, max)(rng);
  }
  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

struct WeatherProfile {
  WeatherLabel label = WeatherLabel::clear;
  std::optional<ValueRange> visibility;     // fog, m
  std::optional<ValueRange> rainfall_rate;  // rain, mm/h
  std::uint64_t rng_seed = 0;

  static WeatherProfile clear() { return {}; }
  static WeatherProfile fog(double v_min = 20.0, double v_max = 60.0) {
    return {WeatherLabel::fog, ValueRange{v_min, v_max}, std::nullopt, 0};
  }
  static WeatherProfile rain(double r = 55.0) {
    return {WeatherLabel::rain, std::nullopt, ValueRange{r, r}, 0};
  }

  void validate() const {
    const bool fog_ok = (label == WeatherLabel::fog) == visibility.has_value();
    const bool rain_ok = (label == WeatherLabel::rain) == rainfall_rate.has_value();
    if (!fog_ok || !rain_ok)
      throw InvalidArgument("weather profile '" + std::string(to_string(label)) +
                            "' must carry exactly the fields its label implies");
    if (visibility && !(visibility->min > 0.0)) throw InvalidArgument("visibility must be > 0");
    if (rainfall_rate && !(rainfall_rate->min >= 0.0))
      throw InvalidArgument("rainfall rate must be >= 0");
  }
  friend bool operator==(const WeatherProfile&, const WeatherProfile&) = default;
};

namespace detail {

struct RayReturn {
  double range = 0.0;
  double pulse = 0.0;
  std::int32_t object = kNoObject;
  bool retro = false;
};

inline Point point_on_ray(Cartesian dir, std::uint32_t ray, const RayReturn& ret, int echo) {
  Point p = make_point(dir.x * ret.range, dir.y * ret.range, dir.z * ret.range, echo, ret.pulse);
  p.ray = ray;
  p.object = ret.object;
  p.retro = ret.retro;
  return p;
}

/// Assigns echo numbers to the returns of one ray and appends the points.
/// Distance-ordered sensors keep the nearest max_echoes returns. Two-echo
/// sensors report the strongest return (second strongest if the strongest is
/// also the last) as echo 1 and the last as echo 2; a single return is
/// reported twice.
inline void emit_ray(std::vector<RayReturn>& returns, const SensorDescriptor& sensor,
                     Cartesian dir, std::uint32_t ray, std::vector<Point>& out) {
  if (returns.empty()) return;
  std::stable_sort(returns.begin(), returns.end(),
                   [](const RayReturn& a, const RayReturn& b) { return a.range < b.range; });
  if (sensor.max_echoes == 2) {
    const RayReturn& last = returns.back();
    std::size_t strongest = 0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < returns.size(); ++i) {
      if (!found || returns[i].pulse > returns[strongest].pulse) {
        strongest = i;
        found = true;
      }
    }
    const RayReturn& first = found ? returns[strongest] : last;
    out.push_back(point_on_ray(dir, ray, first, 1));
    out.push_back(point_on_ray(dir, ray, last, 2));
    return;
  }
  const std::size_t keep = std::min<std::size_t>(returns.size(), std::max<int>(1, sensor.max_echoes));
  for (std::size_t i = 0; i < keep; ++i)
    out.push_back(point_on_ray(dir, ray, returns[i], static_cast<int>(i) + 1));
}

struct RayGroups {
  std::map<std::uint32_t, std::vector<RayReturn>> by_ray;
  std::vector<Point> untagged;  // points without a ray index pass through
};

/// Groups the points of a frame by ray. Duplicated single returns of two-echo
/// sensors collapse into one.
inline RayGroups group_by_ray(const Frame& frame) {
  RayGroups g;
  for (const Point& p : frame.points) {
    if (p.ray == kNoRay) {
      g.untagged.push_back(p);
      continue;
    }
    auto& list = g.by_ray[p.ray];
    const bool dup = std::any_of(list.begin(), list.end(), [&](const RayReturn& r) {
      return r.range == p.r && r.pulse == p.pulse && r.object == p.object;
    });
    if (!dup) list.push_back({p.r, p.pulse, p.object, p.retro});
  }
  return g;
}

inline Cartesian ray_direction(const Frame& frame, std::uint32_t ray) {
  if (ray < frame.sensor.grid.ray_count()) return frame.sensor.grid.direction(ray);
  // Unknown grid: recover the direction from a return of the same ray.
  for (const Point& p : frame.points) {
    if (p.ray == ray && p.r > 0.0) return {p.x / p.r, p.y / p.r, p.z / p.r};
  }
  return {1.0, 0.0, 0.0};
}

inline double truncated_exponential(Rng& rng, double scale, double lo, double hi) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (!(scale > 0.0) || !std::isfinite(scale)) return lo + u * (hi - lo);
  const double a = std::exp(-lo / scale);
  const double b = std::exp(-hi / scale);
  return -scale * std::log(a - u * (a - b));
}

}  // namespace detail

inline double clear_pulse(const ChannelConfig& cfg, double reflectivity, bool retro, double range) {
  const double rr = cfg.reference_range / range;
  return cfg.base_pulse * reflectivity * rr * rr * (retro ? cfg.retro_gain : 1.0);
}

/// Ray-casts `scene` at time `t`. One return per ray that hits an object and
/// passes the detection threshold (retro-reflectors always pass).
inline Frame render_clear(const SceneSpec& scene, double t, std::uint64_t seed,
                          const ChannelConfig& cfg = {}) {
  Frame frame;
  frame.sensor = scene.sensor;
  const RayGrid& grid = scene.sensor.grid;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<detail::RayReturn> returns;
  for (std::uint32_t ray = 0; ray < grid.ray_count(); ++ray) {
    const Cartesian d = grid.direction(ray);
    const auto hit = cast_ray(scene, {d.x, d.y, d.z}, t, cfg.max_range);
    if (!hit) continue;
    const double range_noise = gauss(rng) * cfg.range_noise_sigma;
    const double pulse_noise = gauss(rng) * cfg.pulse_noise_sigma;
    const SceneObject& obj = *hit->object;
    const double pulse =
        clear_pulse(cfg, obj.reflectivity, obj.retro, hit->range) * std::max(0.0, 1.0 + pulse_noise);
    if (pulse < cfg.detection_threshold && !obj.retro) continue;
    returns.assign(1, {std::max(detail::kMinHit, hit->range + range_noise), pulse, obj.id,
                       obj.retro});
    detail::emit_ray(returns, frame.sensor, d, ray, frame.points);
  }
  return frame;
}

inline double fog_extinction(double visibility, const ChannelConfig& cfg = {}) {
  return std::isinf(visibility) ? 0.0 : cfg.koschmieder / visibility;
}

inline double fog_backscatter_probability(double visibility, const ChannelConfig& cfg = {}) {
  return 1.0 - std::exp(-cfg.fog_backscatter_gain * fog_extinction(visibility, cfg));
}

/// Passes a frame through fog of meteorological visibility V (m).
inline Frame apply_fog(const Frame& frame, double visibility, Rng& rng,
                       const ChannelConfig& cfg = {}) {
  if (!(visibility > 0.0)) throw InvalidArgument("apply_fog: visibility must be > 0");
  if (std::isinf(visibility)) return frame;
  const double alpha = fog_extinction(visibility, cfg);
  const double p_scatter = fog_backscatter_probability(visibility, cfg);
  const double fog_scale = visibility / cfg.fog_range_scale_divisor;
  double fog_pulse = cfg.atmosphere_pulse;
  if (frame.sensor.pulse_kind == PulseKind::epw && std::isfinite(visibility))
    fog_pulse *= std::pow(cfg.fog_epw_reference_visibility / visibility, cfg.fog_epw_exponent);

  detail::RayGroups groups = detail::group_by_ray(frame);
  Frame out;
  out.k = frame.k;
  out.sensor = frame.sensor;
  out.points = groups.untagged;
  for (Point& p : out.points) p.pulse *= std::exp(-2.0 * alpha * p.r);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::uint32_t grid_rays = frame.sensor.grid.ray_count();
  const std::uint32_t ray_end =
      std::max(grid_rays, groups.by_ray.empty() ? 0u : groups.by_ray.rbegin()->first + 1);
  std::vector<detail::RayReturn> returns;
  for (std::uint32_t ray = 0; ray < ray_end; ++ray) {
    auto it = groups.by_ray.find(ray);
    if (ray >= grid_rays && it == groups.by_ray.end()) continue;
    returns.clear();
    if (it != groups.by_ray.end()) {
      for (detail::RayReturn r : it->second) {
        r.pulse *= std::exp(-2.0 * alpha * r.range);
        if (r.pulse >= cfg.detection_threshold || r.retro) returns.push_back(r);
      }
    }
    if (ray < grid_rays) {
      int scatter = 0;
      while (scatter < cfg.fog_max_points && unit(rng) < p_scatter) ++scatter;
      for (int s = 0; s < scatter; ++s) {
        const double range =
            detail::truncated_exponential(rng, fog_scale, cfg.fog_range_min, cfg.fog_range_max);
        const double pulse = fog_pulse * (0.5 + 0.5 * unit(rng));
        returns.push_back({range, pulse, kAtmosphere, false});
      }
    }
    if (returns.empty()) continue;
    const Cartesian d = detail::ray_direction(frame, ray);
    detail::emit_ray(returns, out.sensor, d, ray, out.points);
  }
  return out;
}

inline double rain_droplet_rate(double rainfall_rate, const ChannelConfig& cfg = {}) {
  return cfg.droplets_per_mmh * rainfall_rate;
}

/// Passes a frame through rain of rate R (mm/h).
inline Frame apply_rain(const Frame& frame, double rainfall_rate, Rng& rng,
                        const ChannelConfig& cfg = {}) {
  if (!(rainfall_rate >= 0.0)) throw InvalidArgument("apply_rain: rainfall rate must be >= 0");
  if (rainfall_rate == 0.0) return frame;
  const double alpha = cfg.rain_extinction_per_mmh * rainfall_rate;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Droplets: Poisson count over the whole scan, uniform ray and range.
  const std::uint32_t grid_rays = frame.sensor.grid.ray_count();
  std::map<std::uint32_t, std::vector<double>> droplets;
  if (grid_rays > 0) {
    std::poisson_distribution<long> count_dist(rain_droplet_rate(rainfall_rate, cfg));
    const long count = count_dist(rng);
    std::uniform_int_distribution<std::uint32_t> ray_dist(0, grid_rays - 1);
    for (long i = 0; i < count; ++i) {
      const std::uint32_t ray = ray_dist(rng);
      const double range =
          cfg.droplet_range_min + unit(rng) * (cfg.droplet_range_max - cfg.droplet_range_min);
      droplets[ray].push_back(range);
    }
  }
  double droplet_pulse = cfg.atmosphere_pulse;
  if (frame.sensor.pulse_kind == PulseKind::epw) droplet_pulse *= cfg.rain_epw_factor;

  detail::RayGroups groups = detail::group_by_ray(frame);
  Frame out;
  out.k = frame.k;
  out.sensor = frame.sensor;
  out.points = groups.untagged;
  for (Point& p : out.points) p.pulse *= std::exp(-2.0 * alpha * p.r);

  std::vector<std::uint32_t> rays;
  for (const auto& [ray, _] : groups.by_ray) rays.push_back(ray);
  for (const auto& [ray, _] : droplets) rays.push_back(ray);
  std::sort(rays.begin(), rays.end());
  rays.erase(std::unique(rays.begin(), rays.end()), rays.end());

  std::vector<detail::RayReturn> returns;
  for (std::uint32_t ray : rays) {
    returns.clear();
    double nearest_surface = std::numeric_limits<double>::infinity();
    auto it = groups.by_ray.find(ray);
    if (it != groups.by_ray.end()) {
      for (detail::RayReturn r : it->second) {
        const double jitter = 1.0 - cfg.wet_pulse_jitter * unit(rng);
        r.pulse *= std::exp(-2.0 * alpha * r.range) * jitter;
        if (r.object != kAtmosphere) {
          r.range = std::max(detail::kMinHit, r.range + cfg.rain_range_sigma * gauss(rng));
          nearest_surface = std::min(nearest_surface, r.range);
        }
        if (r.pulse >= cfg.detection_threshold || r.retro) returns.push_back(r);
      }
    }
    if (auto d = droplets.find(ray); d != droplets.end()) {
      for (double range : d->second) {
        const double pulse = droplet_pulse * (0.5 + 0.5 * unit(rng));
        if (range < nearest_surface) returns.push_back({range, pulse, kAtmosphere, false});
      }
    }
    if (returns.empty()) continue;
    const Cartesian dir = detail::ray_direction(frame, ray);
    detail::emit_ray(returns, out.sensor, dir, ray, out.points);
  }
  return out;
}

struct DatasetSample {
  Frame frame;
  GroundTruth truth;
  std::string scenario_id;

  friend bool operator==(const DatasetSample&, const DatasetSample&) = default;
};

/// Renders one frame of a (scene, profile) cell.
inline DatasetSample simulate_frame(const SceneSpec& scene, const WeatherProfile& profile,
                                    std::uint64_t frame_in_cell, std::uint64_t frame_seed,
                                    const ChannelConfig& cfg = {}) {
  Rng rng(frame_seed);
  const std::uint64_t render_seed = rng();
  const double t = static_cast<double>(frame_in_cell) * cfg.frame_period;
  DatasetSample s;
  s.scenario_id = scene.scenario_id;
  s.truth.label = profile.label;
  Frame clear = render_clear(scene, t, render_seed, cfg);
  switch (profile.label) {
    case WeatherLabel::clear:
      s.frame = std::move(clear);
      break;
    case WeatherLabel::fog: {
      const double v = profile.visibility->draw(rng);
      s.truth.visibility = v;
      s.frame = apply_fog(clear, v, rng, cfg);
      break;
    }
    case WeatherLabel::rain: {
      const double r = profile.rainfall_rate->draw(rng);
      s.truth.rainfall_rate = r;
      s.frame = apply_rain(clear, r, rng, cfg);
      break;
    }
  }
  return s;
}

/// Renders frames_per_cell frames for every (scene, profile) pair, scene-major.
/// Frame k is the global sample index. Output is independent of `jobs`.
inline std::vector<DatasetSample> generate_dataset(const std::vector<SceneSpec>& scenes,
                                                   const std::vector<WeatherProfile>& profiles,
                                                   std::size_t frames_per_cell,
                                                   std::uint64_t seed,
                                                   const ChannelConfig& cfg = {},
                                                   unsigned jobs = 1) {
  if (scenes.empty()) throw InvalidArgument("generate_dataset: no scenes");
  if (profiles.empty()) throw InvalidArgument("generate_dataset: no weather profiles");
  if (frames_per_cell < 1) throw InvalidArgument("generate_dataset: frames_per_cell must be >= 1");
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    scenes[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (scenes[j].scenario_id == scenes[i].scenario_id)
        throw InvalidArgument("duplicate scenario_id '" + scenes[i].scenario_id + "'");
  }
  for (const auto& p : profiles) p.validate();

  const std::size_t cells = scenes.size() * profiles.size();
  std::vector<DatasetSample> out(cells * frames_per_cell);
  parallel_for(out.size(), jobs, [&](std::size_t idx) {
    const std::size_t cell = idx / frames_per_cell;
    const std::size_t j = idx % frames_per_cell;
    const SceneSpec& scene = scenes[cell / profiles.size()];
    const WeatherProfile& profile = profiles[cell % profiles.size()];
    const std::uint64_t fs = derive_seed(seed ^ profile.rng_seed, cell, j);
    out[idx] = simulate_frame(scene, profile, j, fs, cfg);
    out[idx].frame.k = idx;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Built-in scenes: a static target setup,
// a dynamic traffic setup and a setup with targets leaving the field of view.

inline SensorDescriptor default_sensor() {
  SensorDescriptor s;
  s.pulse_kind = PulseKind::intensity;
  s.max_echoes = 3;
  s.grid.azimuth_min = -50.0 * kPi / 180.0;
  s.grid.azimuth_max = 50.0 * kPi / 180.0;
  s.grid.azimuth_count = 501;
  for (int i = 0; i < 16; ++i) s.grid.elevations.push_back((-15.0 + 2.0 * i) * kPi / 180.0);
  return s;
}

inline constexpr std::int32_t kGroundId = 0;
inline constexpr std::int32_t kPedestrianId = 9;

inline SceneObject ground_object() {
  return {kGroundId, "ground", Plane{{0.0, 0.0, 1.0}, -1.5}, 0.15, false, {}};
}

inline SceneObject pedestrian(Vec3 base, Motion motion = {}) {
  return {kPedestrianId, "pedestrian", Cylinder{base, 0.25, 1.75}, 0.05, false, motion};
}

inline SceneSpec setup_static(const SensorDescriptor& sensor = default_sensor()) {
  SceneSpec s{"A", {}, sensor};
  s.objects.push_back(ground_object());
  s.objects.push_back({1, "target_05", Box{{10.0, -1.0, -0.5}, {0.05, 0.8, 1.0}}, 0.05, false, {}});
  s.objects.push_back({2, "target_50", Box{{13.0, 0.0, -0.5}, {0.05, 0.8, 1.0}}, 0.50, false, {}});
  s.objects.push_back({3, "target_90", Box{{16.0, 1.0, -0.5}, {0.05, 0.8, 1.0}}, 0.90, false, {}});
  s.objects.push_back({4, "retro_target", Box{{18.5, -0.9, -0.8}, {0.05, 0.4, 0.4}}, 0.9, true, {}});
  s.objects.push_back(pedestrian({18.0, 0.4, -1.5}));
  return s;
}

inline SceneSpec setup_traffic(const SensorDescriptor& sensor = default_sensor()) {
  SceneSpec s{"B", {}, sensor};
  s.objects.push_back(ground_object());
  const Motion leaving{{3.0, 0.0, 0.0}, 8.0};
  s.objects.push_back({1, "car", Box{{12.0, 0.0, -0.75}, {4.5, 1.8, 1.5}}, 0.5, false, leaving});
  s.objects.push_back({2, "tail_light_left", Box{{9.72, 0.7, -0.4}, {0.05, 0.2, 0.1}}, 0.9, true, leaving});
  s.objects.push_back({3, "tail_light_right", Box{{9.72, -0.7, -0.4}, {0.05, 0.2, 0.1}}, 0.9, true, leaving});
  s.objects.push_back({4, "reflector_post", Cylinder{{7.0, 2.2, -1.5}, 0.05, 1.0}, 0.9, true, {}});
  s.objects.push_back({5, "cyclist", Box{{6.0, -4.0, -0.6}, {1.7, 0.5, 1.8}}, 0.3, false, {{0.0, 2.0, 0.0}, 5.0}});
  s.objects.push_back(pedestrian({18.0, -0.6, -1.5}));
  return s;
}

inline SceneSpec setup_leaving(const SensorDescriptor& sensor = default_sensor()) {
  SceneSpec s{"C", {}, sensor};
  s.objects.push_back(ground_object());
  const Motion sideways{{0.0, 1.5, 0.0}, 10.0};
  s.objects.push_back({1, "target_a", Box{{8.0, -1.0, -0.5}, {0.05, 1.0, 1.0}}, 0.5, false, sideways});
  s.objects.push_back({2, "target_b", Box{{14.0, -2.0, -0.5}, {0.05, 1.0, 1.0}}, 0.9, false, sideways});
  s.objects.push_back(pedestrian({18.0, 0.3, -1.5}));
  return s;
}

inline std::vector<SceneSpec> default_scenes(const SensorDescriptor& sensor = default_sensor()) {
  return {setup_static(sensor), setup_traffic(sensor), setup_leaving(sensor)};
}

inline std::vector<WeatherProfile> default_profiles() {
  return {WeatherProfile::clear(), WeatherProfile::rain(55.0), WeatherProfile::fog(20.0, 60.0)};
}

}  // namespace lidarwx
