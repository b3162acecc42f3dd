#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "lidarwx/features.hpp"
#include "lidarwx/weather_sim.hpp"

using namespace lidarwx;

namespace {

SensorDescriptor narrow_sensor(std::uint8_t echoes = 3) {
  SensorDescriptor s;
  s.max_echoes = echoes;
  s.grid.azimuth_min = -10.0 * kPi / 180.0;
  s.grid.azimuth_max = 10.0 * kPi / 180.0;
  s.grid.azimuth_count = 41;
  for (int i = 0; i < 16; ++i) s.grid.elevations.push_back((-15.0 + 2.0 * i) * kPi / 180.0);
  return s;
}

SceneSpec plate_scene(double x, double reflectivity, bool retro = false,
                      SensorDescriptor sensor = narrow_sensor()) {
  SceneSpec s{"plate", {}, sensor};
  s.objects.push_back({1, "plate", Box{{x, 0.0, 0.0}, {0.05, 1.0, 1.0}}, reflectivity, retro, {}});
  return s;
}

std::size_t count_object(const Frame& f, std::int32_t id) {
  std::size_t n = 0;
  for (const Point& p : f.points) n += p.object == id;
  return n;
}

}  // namespace

TEST(RenderClear, PlateAtTenMetres) {
  const Frame f = render_clear(plate_scene(10.0, 0.5), 0.0, 1);
  ASSERT_FALSE(f.points.empty());
  for (const Point& p : f.points) {
    EXPECT_EQ(p.echo, 1);
    EXPECT_EQ(p.object, 1);
    EXPECT_NEAR(p.r, 10.0, 0.15);
    EXPECT_TRUE(is_valid(p));
  }
}

TEST(RenderClear, OneEchoOnePointPerRay) {
  const Frame f = render_clear(setup_traffic(narrow_sensor()), 0.3, 5);
  std::map<std::uint32_t, int> per_ray;
  for (const Point& p : f.points) {
    EXPECT_EQ(p.echo, 1);
    ++per_ray[p.ray];
  }
  for (const auto& [ray, n] : per_ray) EXPECT_EQ(n, 1) << "ray " << ray;
}

TEST(RenderClear, DeterministicPerSeed) {
  const SceneSpec s = setup_static(narrow_sensor());
  EXPECT_EQ(render_clear(s, 0.5, 77), render_clear(s, 0.5, 77));
  EXPECT_NE(render_clear(s, 0.5, 77), render_clear(s, 0.5, 78));
}

TEST(RenderClear, NoObjectsGivesEmptyFrame) {
  const SceneSpec s{"empty", {}, narrow_sensor()};
  EXPECT_TRUE(render_clear(s, 0.0, 1).points.empty());
}

TEST(RenderClear, PulseRatioEighteen) {
  ChannelConfig cfg;
  cfg.pulse_noise_sigma = 0.0;
  const Frame bright = render_clear(plate_scene(6.0, 0.9), 0.0, 3, cfg);
  const Frame dark = render_clear(plate_scene(6.0, 0.05), 0.0, 3, cfg);
  ASSERT_EQ(bright.points.size(), dark.points.size());
  ASSERT_FALSE(bright.points.empty());
  for (std::size_t i = 0; i < bright.points.size(); ++i) {
    ASSERT_EQ(bright.points[i].ray, dark.points[i].ray);
    EXPECT_NEAR(bright.points[i].pulse / dark.points[i].pulse, 18.0, 18.0 * 1e-9);
  }
  EXPECT_NEAR(clear_pulse(cfg, 0.9, false, 7.0) / clear_pulse(cfg, 0.05, false, 7.0), 18.0, 1e-12);
}

TEST(RenderClear, MovingObjectFollowsMotion) {
  SceneSpec s = plate_scene(8.0, 0.5);
  s.objects[0].motion = {{2.0, 0.0, 0.0}, 0.0};
  ChannelConfig cfg;
  cfg.range_noise_sigma = 0.0;
  const Frame f = render_clear(s, 1.0, 1, cfg);
  ASSERT_FALSE(f.points.empty());
  for (const Point& p : f.points) EXPECT_NEAR(p.x, 10.0 - 0.025, 1e-9);
}

TEST(Fog, InfiniteVisibilityIsIdentity) {
  const Frame f = render_clear(setup_static(narrow_sensor()), 0.0, 9);
  Rng rng(1);
  EXPECT_EQ(apply_fog(f, std::numeric_limits<double>::infinity(), rng), f);
}

TEST(Fog, RejectsNonPositiveVisibility) {
  Rng rng(1);
  EXPECT_THROW(apply_fog(Frame{}, 0.0, rng), InvalidArgument);
  EXPECT_THROW(apply_fog(Frame{}, -5.0, rng), InvalidArgument);
}

TEST(Fog, DarkTargetAt18mVanishesAtV25) {
  const SceneSpec s = plate_scene(18.0, 0.05);
  int detected = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Rng rng(derive_seed(12, trial));
    const Frame clear = render_clear(s, 0.0, rng());
    ASSERT_GT(count_object(clear, 1), 0u);
    detected += count_object(apply_fog(clear, 25.0, rng), 1) > 0;
  }
  EXPECT_LT(detected / 1000.0, 0.05);
}

TEST(Fog, RetroTargetAt19mMostlyLaterEcho) {
  const SceneSpec s = plate_scene(19.0, 0.9, true);
  std::size_t later = 0, total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(derive_seed(13, trial));
    const Frame fog = apply_fog(render_clear(s, 0.0, rng()), 25.0, rng);
    for (const Point& p : fog.points) {
      if (p.object != 1) continue;
      ++total;
      later += p.echo >= 2;
    }
  }
  ASSERT_GT(total, 0u);
  EXPECT_GT(static_cast<double>(later) / static_cast<double>(total), 0.5);
}

TEST(Fog, NearRangeBackscatter) {
  const Frame clear = render_clear(setup_static(narrow_sensor()), 0.0, 2);
  Rng rng(2);
  const Frame fog = apply_fog(clear, 20.0, rng);
  std::size_t n = 0;
  for (const Point& p : fog.points) {
    if (p.object != kAtmosphere) continue;
    ++n;
    EXPECT_GE(p.r, 1.0);
    EXPECT_LE(p.r, 10.0);
  }
  EXPECT_GT(n, clear.points.size() / 2);
}

TEST(Fog, EpwGrowsAsVisibilityDrops) {
  SensorDescriptor s = narrow_sensor();
  s.pulse_kind = PulseKind::epw;
  Frame empty;
  empty.sensor = s;
  const auto mean_atmo_pulse = [&](double v) {
    Rng rng(4);
    double sum = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < 20; ++i) {
      for (const Point& p : apply_fog(empty, v, rng).points) {
        sum += p.pulse;
        ++n;
      }
    }
    return sum / static_cast<double>(n);
  };
  EXPECT_GT(mean_atmo_pulse(20.0), mean_atmo_pulse(60.0));
}

TEST(Fog, MonotoneLaterEchoes) {
  const SceneSpec s = setup_static(narrow_sensor());
  const Frame clear = render_clear(s, 0.0, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (double v : {25.0, 40.0, 55.0}) {
    Rng rng(derive_seed(6, static_cast<std::uint64_t>(v)));
    double sum = 0.0;
    for (int i = 0; i < 200; ++i) {
      const auto n = echo_counts(apply_fog(clear, v, rng));
      sum += static_cast<double>(n[1] + n[2]);
    }
    EXPECT_LE(sum / 200.0, prev) << "V = " << v;
    prev = sum / 200.0;
  }
}

TEST(Rain, ZeroRateIsIdentity) {
  const Frame f = render_clear(setup_static(narrow_sensor()), 0.0, 9);
  Rng rng(1);
  EXPECT_EQ(apply_rain(f, 0.0, rng), f);
  EXPECT_THROW(apply_rain(f, -1.0, rng), InvalidArgument);
}

TEST(Rain, DropletCountIsPoisson) {
  Frame empty;
  empty.sensor = default_sensor();
  const double rate = rain_droplet_rate(55.0);
  EXPECT_DOUBLE_EQ(rate, 110.0);
  double sum = 0.0;
  const int frames = 1000;
  for (int i = 0; i < frames; ++i) {
    Rng rng(derive_seed(31, i));
    for (const Point& p : apply_rain(empty, 55.0, rng).points) sum += p.object == kAtmosphere;
  }
  const double mean = sum / frames;
  EXPECT_LE(std::abs(mean - rate), 3.0 * std::sqrt(rate / frames));
}

TEST(Rain, CarDetectedEveryFrame) {
  SceneSpec s{"car", {}, narrow_sensor()};
  s.objects.push_back({1, "car", Box{{12.0, 0.0, -0.75}, {4.5, 1.8, 1.5}}, 0.5, false, {}});
  for (int trial = 0; trial < 1000; ++trial) {
    Rng rng(derive_seed(44, trial));
    const Frame rain = apply_rain(render_clear(s, 0.0, rng()), 55.0, rng);
    std::size_t car = 0;
    for (const Point& p : rain.points) car += p.object == 1 && (p.echo == 1 || p.echo == 2);
    ASSERT_GT(car, 0u) << "trial " << trial;
  }
}

TEST(Rain, AddsLaterEchoesAndPulseSpread) {
  const SceneSpec s = setup_static(default_sensor());
  const Frame clear = render_clear(s, 0.0, 3);
  Rng rng(3);
  const Frame rain = apply_rain(clear, 55.0, rng);
  const auto n = echo_counts(rain);
  EXPECT_GT(n[1], 0u);
  EXPECT_LT(n[1] + n[2], n[0] / 20);
}

TEST(Channel, NeverIncreasesObjectPulse) {
  const SceneSpec s = setup_traffic(narrow_sensor());
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(derive_seed(50, trial));
    const Frame clear = render_clear(s, 0.1 * trial, rng());
    std::map<std::pair<std::uint32_t, std::int32_t>, double> before;
    for (const Point& p : clear.points) before[{p.ray, p.object}] = p.pulse;
    for (const Frame& out : {apply_fog(clear, 30.0, rng), apply_rain(clear, 55.0, rng)}) {
      for (const Point& p : out.points) {
        if (p.object == kAtmosphere) continue;
        const auto it = before.find({p.ray, p.object});
        ASSERT_NE(it, before.end());
        EXPECT_LE(p.pulse, it->second);
      }
    }
  }
}

TEST(Channel, EchoesIncreaseWithRange) {
  const SceneSpec s = setup_static(narrow_sensor());
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(derive_seed(60, trial));
    const Frame clear = render_clear(s, 0.0, rng());
    for (const Frame& out : {apply_fog(clear, 20.0, rng), apply_rain(clear, 55.0, rng)}) {
      std::map<std::uint32_t, std::vector<const Point*>> rays;
      for (const Point& p : out.points) rays[p.ray].push_back(&p);
      for (const auto& [ray, pts] : rays) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          EXPECT_EQ(pts[i]->echo, i + 1);
          if (i > 0) {
            EXPECT_GT(pts[i]->r, pts[i - 1]->r);
          }
          EXPECT_TRUE(is_valid(*pts[i]));
        }
      }
    }
  }
}

TEST(Channel, TwoEchoSensorReportsStrongestAndLast) {
  std::vector<Point> out;
  std::vector<detail::RayReturn> returns{{3.0, 0.8, kAtmosphere, false},
                                         {5.0, 0.9, kAtmosphere, false},
                                         {12.0, 0.6, 1, false}};
  SensorDescriptor s;
  s.max_echoes = 2;
  detail::emit_ray(returns, s, {1, 0, 0}, 0, out);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].echo, 1);
  EXPECT_DOUBLE_EQ(out[0].r, 5.0);
  EXPECT_EQ(out[1].echo, 2);
  EXPECT_DOUBLE_EQ(out[1].r, 12.0);

  out.clear();
  std::vector<detail::RayReturn> single{{7.0, 2.0, 1, false}};
  detail::emit_ray(single, s, {1, 0, 0}, 0, out);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].echo, 1);
  EXPECT_EQ(out[1].echo, 2);
  EXPECT_EQ(out[0].r, out[1].r);
  EXPECT_EQ(out[0].pulse, out[1].pulse);
}

TEST(Channel, TwoEchoFramesSurviveFog) {
  const SceneSpec s = setup_static(narrow_sensor(2));
  const Frame clear = render_clear(s, 0.0, 1);
  EXPECT_EQ(clear.points.size() % 2, 0u);
  Rng rng(1);
  EXPECT_EQ(apply_fog(clear, std::numeric_limits<double>::infinity(), rng), clear);
}

TEST(Profiles, Validation) {
  EXPECT_NO_THROW(WeatherProfile::clear().validate());
  EXPECT_NO_THROW(WeatherProfile::fog().validate());
  EXPECT_NO_THROW(WeatherProfile::rain().validate());
  WeatherProfile bad = WeatherProfile::fog();
  bad.rainfall_rate = ValueRange{1, 1};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = WeatherProfile::rain();
  bad.rainfall_rate.reset();
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_EQ(WeatherProfile::fog().visibility->min, 20.0);
  EXPECT_EQ(WeatherProfile::fog().visibility->max, 60.0);
  EXPECT_EQ(WeatherProfile::rain().rainfall_rate->min, 55.0);
}

TEST(Dataset, SingleCell) {
  const auto d = generate_dataset({setup_static(narrow_sensor())}, {WeatherProfile::fog()}, 5, 1);
  ASSERT_EQ(d.size(), 5u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d[i].truth.label, WeatherLabel::fog);
    ASSERT_TRUE(d[i].truth.visibility);
    EXPECT_GE(*d[i].truth.visibility, 20.0);
    EXPECT_LE(*d[i].truth.visibility, 60.0);
    EXPECT_EQ(d[i].frame.k, i);
    EXPECT_EQ(d[i].scenario_id, "A");
  }
}

TEST(Dataset, CountsPerClass) {
  const auto d = generate_dataset(default_scenes(narrow_sensor()), default_profiles(), 400, 3);
  ASSERT_EQ(d.size(), 3600u);
  std::map<WeatherLabel, int> per_class;
  std::map<std::string, int> per_scenario;
  for (const auto& s : d) {
    ++per_class[s.truth.label];
    ++per_scenario[s.scenario_id];
    EXPECT_NO_THROW(s.truth.validate());
  }
  for (WeatherLabel l : kAllLabels) EXPECT_EQ(per_class[l], 1200);
  EXPECT_EQ(per_scenario.size(), 3u);
}

TEST(Dataset, DeterministicAndWorkerIndependent) {
  const auto scenes = default_scenes(narrow_sensor());
  const auto a = generate_dataset(scenes, default_profiles(), 6, 42, {}, 1);
  const auto b = generate_dataset(scenes, default_profiles(), 6, 42, {}, 3);
  const auto c = generate_dataset(scenes, default_profiles(), 6, 43, {}, 1);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Dataset, Errors) {
  const auto scenes = default_scenes(narrow_sensor());
  EXPECT_THROW(generate_dataset({}, default_profiles(), 1, 1), InvalidArgument);
  EXPECT_THROW(generate_dataset(scenes, {}, 1, 1), InvalidArgument);
  EXPECT_THROW(generate_dataset(scenes, default_profiles(), 0, 1), InvalidArgument);
  EXPECT_THROW(generate_dataset({scenes[0], scenes[0]}, default_profiles(), 1, 1), InvalidArgument);
  SceneSpec bad = scenes[0];
  bad.objects[1].reflectivity = 1.5;
  EXPECT_THROW(generate_dataset({bad}, default_profiles(), 1, 1), InvalidArgument);
}
