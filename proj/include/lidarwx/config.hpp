#pragma once

// Simulation configuration file (JSON). Schema:
//
// {
//   "seed": 42,                       // optional
//   "frames_per_cell": 400,           // optional
//   "sensor": {"pulse_kind": "intensity" | "epw", "max_echoes": 2 | 3,
//              "azimuth_min_deg", "azimuth_max_deg", "azimuth_count",
//              "elevations_deg": [...]},
//   "channel": {<any ChannelConfig member by name>},   // optional, partial
//   "scenes": [{"scenario_id": "A", "objects": [
//       {"id": 1, "name": "car", "reflectivity": 0.5, "retro": false,
//        "shape": {"type": "plane", "normal": [x,y,z], "offset": d}
//               | {"type": "box", "center": [x,y,z], "size": [dx,dy,dz]}
//               | {"type": "cylinder", "base": [x,y,z], "radius": r, "height": h},
//        "motion": {"velocity": [vx,vy,vz], "period": s}}]}],   // motion optional
//   "profiles": [{"label": "clear"},
//                {"label": "rain", "rainfall_rate": 55 | [min, max]},
//                {"label": "fog", "visibility": 40 | [min, max], "rng_seed": 0}]
// }

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lidarwx/error.hpp"
#include "lidarwx/feature_table.hpp"
#include "lidarwx/weather_sim.hpp"

namespace lidarwx {

struct SimConfig {
  std::vector<SceneSpec> scenes;
  std::vector<WeatherProfile> profiles;
  ChannelConfig channel;
  std::size_t frames_per_cell = 400;
  std::uint64_t seed = 42;
};

inline SimConfig default_sim_config() {
  return {default_scenes(), default_profiles(), ChannelConfig{}, 400, 42};
}

#define LIDARWX_CHANNEL_FIELDS(X)                                                              \
  X(base_pulse) X(reference_range) X(retro_gain) X(detection_threshold) X(max_range)          \
  X(range_noise_sigma) X(pulse_noise_sigma) X(koschmieder) X(fog_backscatter_gain)           \
  X(fog_max_points) X(fog_range_scale_divisor) X(fog_range_min) X(fog_range_max)             \
  X(atmosphere_pulse) X(fog_epw_reference_visibility) X(fog_epw_exponent) X(rain_epw_factor) \
  X(rain_extinction_per_mmh) X(droplets_per_mmh) X(droplet_range_min) X(droplet_range_max)   \
  X(wet_pulse_jitter) X(rain_range_sigma) X(frame_period)

namespace detail {

inline double from_deg(double deg) { return deg * kPi / 180.0; }
// Rounded to 1e-9 degrees so that whole-degree values print cleanly.
inline double to_deg(double rad) { return std::round(rad * 180.0 / kPi * 1e9) / 1e9; }

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json vec3_to_json(Vec3 v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline ValueRange range_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw InvalidArgument("expected a number or a [min, max] pair");
}

inline nlohmann::json range_to_json(const ValueRange& r) {
  if (r.min == r.max) return r.min;
  return nlohmann::json::array({r.min, r.max});
}

inline Shape shape_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "plane") return Plane{vec3_from_json(j.at("normal")), j.at("offset").get<double>()};
  if (type == "box") return Box{vec3_from_json(j.at("center")), vec3_from_json(j.at("size"))};
  if (type == "cylinder")
    return Cylinder{vec3_from_json(j.at("base")), j.at("radius").get<double>(),
                    j.at("height").get<double>()};
  throw InvalidArgument("unknown shape type '" + type + "'");
}

inline nlohmann::json shape_to_json(const Shape& s) {
  if (const auto* p = std::get_if<Plane>(&s))
    return {{"type", "plane"}, {"normal", vec3_to_json(p->normal)}, {"offset", p->offset}};
  if (const auto* b = std::get_if<Box>(&s))
    return {{"type", "box"}, {"center", vec3_to_json(b->center)}, {"size", vec3_to_json(b->size)}};
  const auto& c = std::get<Cylinder>(s);
  return {{"type", "cylinder"}, {"base", vec3_to_json(c.base)}, {"radius", c.radius}, {"height", c.height}};
}

}  // namespace detail

inline SensorDescriptor sensor_from_json(const nlohmann::json& j) {
  SensorDescriptor s;
  const auto kind = j.value("pulse_kind", std::string("intensity"));
  if (kind == "intensity") s.pulse_kind = PulseKind::intensity;
  else if (kind == "epw") s.pulse_kind = PulseKind::epw;
  else throw InvalidArgument("unknown pulse_kind '" + kind + "'");
  const int echoes = j.value("max_echoes", 3);
  if (echoes != 2 && echoes != 3) throw InvalidArgument("max_echoes must be 2 or 3");
  s.max_echoes = static_cast<std::uint8_t>(echoes);
  s.grid.azimuth_min = detail::from_deg(j.at("azimuth_min_deg").get<double>());
  s.grid.azimuth_max = detail::from_deg(j.at("azimuth_max_deg").get<double>());
  s.grid.azimuth_count = j.at("azimuth_count").get<std::uint32_t>();
  for (double e : j.at("elevations_deg").get<std::vector<double>>())
    s.grid.elevations.push_back(detail::from_deg(e));
  return s;
}

inline nlohmann::json sensor_to_json(const SensorDescriptor& s) {
  std::vector<double> elev;
  for (double e : s.grid.elevations) elev.push_back(detail::to_deg(e));
  return {{"pulse_kind", std::string(to_string(s.pulse_kind))},
          {"max_echoes", s.max_echoes},
          {"azimuth_min_deg", detail::to_deg(s.grid.azimuth_min)},
          {"azimuth_max_deg", detail::to_deg(s.grid.azimuth_max)},
          {"azimuth_count", s.grid.azimuth_count},
          {"elevations_deg", elev}};
}

inline ChannelConfig channel_from_json(const nlohmann::json& j, ChannelConfig c = {}) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
#define LIDARWX_READ(name) \
  if (key == #name) {      \
    known = true;          \
    c.name = j.at(key).get<decltype(c.name)>(); \
  }
    LIDARWX_CHANNEL_FIELDS(LIDARWX_READ)
#undef LIDARWX_READ
    if (!known) throw InvalidArgument("unknown channel parameter '" + key + "'");
  }
  return c;
}

inline nlohmann::json channel_to_json(const ChannelConfig& c) {
  nlohmann::json j;
#define LIDARWX_WRITE(name) j[#name] = c.name;
  LIDARWX_CHANNEL_FIELDS(LIDARWX_WRITE)
#undef LIDARWX_WRITE
  return j;
}

inline WeatherProfile profile_from_json(const nlohmann::json& j) {
  WeatherProfile p;
  p.label = parse_label(j.at("label").get<std::string>());
  if (j.contains("visibility")) p.visibility = detail::range_from_json(j.at("visibility"));
  if (j.contains("rainfall_rate")) p.rainfall_rate = detail::range_from_json(j.at("rainfall_rate"));
  // Defaults for the label's implied field.
  if (p.label == WeatherLabel::fog && !p.visibility) p.visibility = ValueRange{20.0, 60.0};
  if (p.label == WeatherLabel::rain && !p.rainfall_rate) p.rainfall_rate = ValueRange{55.0, 55.0};
  p.rng_seed = j.value("rng_seed", std::uint64_t{0});
  p.validate();
  return p;
}

inline nlohmann::json profile_to_json(const WeatherProfile& p) {
  nlohmann::json j{{"label", std::string(to_string(p.label))}};
  if (p.visibility) j["visibility"] = detail::range_to_json(*p.visibility);
  if (p.rainfall_rate) j["rainfall_rate"] = detail::range_to_json(*p.rainfall_rate);
  if (p.rng_seed != 0) j["rng_seed"] = p.rng_seed;
  return j;
}

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  try {
    SimConfig cfg = default_sim_config();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.frames_per_cell = j.value("frames_per_cell", cfg.frames_per_cell);
    if (j.contains("channel")) cfg.channel = channel_from_json(j.at("channel"));
    const SensorDescriptor sensor =
        j.contains("sensor") ? sensor_from_json(j.at("sensor")) : default_sensor();
    if (j.contains("scenes")) {
      cfg.scenes.clear();
      for (const auto& sj : j.at("scenes")) {
        SceneSpec s;
        s.scenario_id = sj.at("scenario_id").get<std::string>();
        s.sensor = sensor;
        for (const auto& oj : sj.at("objects")) {
          SceneObject o;
          o.id = oj.at("id").get<std::int32_t>();
          o.name = oj.value("name", std::string());
          o.shape = detail::shape_from_json(oj.at("shape"));
          o.reflectivity = oj.at("reflectivity").get<double>();
          o.retro = oj.value("retro", false);
          if (oj.contains("motion")) {
            o.motion.velocity = detail::vec3_from_json(oj.at("motion").at("velocity"));
            o.motion.period = oj.at("motion").value("period", 0.0);
          }
          s.objects.push_back(std::move(o));
        }
        s.validate();
        cfg.scenes.push_back(std::move(s));
      }
    } else {
      cfg.scenes = default_scenes(sensor);
    }
    if (j.contains("profiles")) {
      cfg.profiles.clear();
      for (const auto& pj : j.at("profiles")) cfg.profiles.push_back(profile_from_json(pj));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

inline nlohmann::json sim_config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["frames_per_cell"] = cfg.frames_per_cell;
  j["sensor"] = sensor_to_json(cfg.scenes.empty() ? default_sensor() : cfg.scenes.front().sensor);
  j["channel"] = channel_to_json(cfg.channel);
  j["scenes"] = nlohmann::json::array();
  for (const auto& s : cfg.scenes) {
    nlohmann::json sj{{"scenario_id", s.scenario_id}, {"objects", nlohmann::json::array()}};
    for (const auto& o : s.objects) {
      nlohmann::json oj{{"id", o.id},
                        {"name", o.name},
                        {"shape", detail::shape_to_json(o.shape)},
                        {"reflectivity", o.reflectivity},
                        {"retro", o.retro}};
      if (!(o.motion == Motion{}))
        oj["motion"] = {{"velocity", detail::vec3_to_json(o.motion.velocity)},
                        {"period", o.motion.period}};
      sj["objects"].push_back(oj);
    }
    j["scenes"].push_back(sj);
  }
  j["profiles"] = nlohmann::json::array();
  for (const auto& p : cfg.profiles) j["profiles"].push_back(profile_to_json(p));
  return j;
}

inline SimConfig load_sim_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return sim_config_from_json(j);
}

}  // namespace lidarwx
