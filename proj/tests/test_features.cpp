#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lidarwx/features.hpp"
#include "lidarwx/stats.hpp"
#include "oracles/eigen3_oracle.hpp"
#include "oracles/feature_oracle.hpp"
#include "support.hpp"

using namespace lidarwx;

TEST(MeanVar, Constant) {
  const std::vector<double> v{4.25, 4.25, 4.25};
  const MeanVar mv = attribute_mean_var(v);
  EXPECT_EQ(mv.mean, 4.25);
  EXPECT_EQ(mv.variance, 0.0);
}

TEST(MeanVar, PopulationConvention) {
  const std::vector<double> v{1.0, 3.0};
  const MeanVar mv = attribute_mean_var(v);
  EXPECT_EQ(mv.mean, 2.0);
  EXPECT_EQ(mv.variance, 1.0);
}

TEST(MeanVar, EmptyThrows) { EXPECT_THROW(attribute_mean_var({}), InvalidArgument); }

TEST(MeanVar, MatchesTwoPassOracle) {
  Rng rng(21);
  std::normal_distribution<double> g(50.0, 12.0);
  std::vector<double> v(1000);
  for (double& t : v) t = g(rng);
  std::vector<long double> lv(v.begin(), v.end());
  const MeanVar mv = attribute_mean_var(v);
  EXPECT_LE(support::rel_err(mv.mean, oracle::mean_of(lv)), 1e-12);
  EXPECT_LE(support::rel_err(mv.variance, oracle::var_of(lv)), 1e-12);
}

TEST(Boxplot, QuartilesAndOutliers) {
  const BoxplotStats s = boxplot_stats({1, 2, 3, 4, 5, 6, 7, 8, 100});
  EXPECT_EQ(s.count, 9u);
  EXPECT_EQ(s.median, 5.0);
  EXPECT_EQ(s.q1, 3.0);
  EXPECT_EQ(s.q3, 7.0);
  EXPECT_EQ(s.whisker_low, 1.0);
  EXPECT_EQ(s.whisker_high, 8.0);
  ASSERT_EQ(s.outliers.size(), 1u);
  EXPECT_EQ(s.outliers[0], 100.0);
}

TEST(EchoCounts, Basic) {
  EXPECT_EQ(echo_counts(Frame{}), (std::array<std::size_t, 3>{0, 0, 0}));
  Frame f;
  for (int i = 0; i < 7; ++i) f.points.push_back(make_point(1 + i, 0, 0, 2));
  EXPECT_EQ(echo_counts(f), (std::array<std::size_t, 3>{0, 7, 0}));
}

TEST(EchoCounts, MatchPartitionSizes) {
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const Frame f = support::random_frame(rng, 400);
    const auto n = echo_counts(f);
    const auto parts = partition_by_echo(f);
    for (int t = 0; t < 3; ++t) EXPECT_EQ(n[t], parts[t].size());
  }
}

TEST(MeanRangePerEcho, Basic) {
  Frame f;
  f.points = {make_point(4, 0, 0, 2), make_point(0, 6, 0, 2), make_point(1, 0, 0, 1)};
  const MaskedValue r2 = mean_range_per_echo(f, 2);
  EXPECT_FALSE(r2.masked);
  EXPECT_DOUBLE_EQ(r2.value, 5.0);
  const MaskedValue r3 = mean_range_per_echo(f, 3);
  EXPECT_TRUE(r3.masked);
  EXPECT_EQ(r3.value, 0.0);
}

TEST(MeanRangePerEcho, MatchesFilterThenAverage) {
  Rng rng(8);
  const Frame f = support::random_frame(rng, 800);
  for (int t = 1; t <= 3; ++t) {
    std::vector<long double> r;
    for (const Point& p : f.points)
      if (p.echo == t) r.push_back(p.r);
    if (r.empty()) continue;
    EXPECT_LE(support::rel_err(mean_range_per_echo(f, t).value, oracle::mean_of(r)), 1e-12);
  }
}

TEST(Eigenvalues, IdenticalPoints) {
  Frame f;
  for (int i = 0; i < 5; ++i) f.points.push_back(make_point(3, 1, 2));
  const Eigenvalues3 ev = covariance_eigenvalues(f);
  EXPECT_FALSE(ev.masked);
  for (double v : ev.values) EXPECT_EQ(v, 0.0);
}

TEST(Eigenvalues, RankOneAlongX) {
  Frame f;
  for (double x : {1.0, 2.0, 3.0, 4.0}) f.points.push_back(make_point(x, 0, 0));
  const Eigenvalues3 ev = covariance_eigenvalues(f);
  EXPECT_NEAR(ev.values[0], 1.25, 1e-14);
  EXPECT_EQ(ev.values[1], 0.0);
  EXPECT_EQ(ev.values[2], 0.0);
}

TEST(Eigenvalues, EmptyIsMasked) {
  const Eigenvalues3 ev = covariance_eigenvalues(Frame{});
  EXPECT_TRUE(ev.masked);
  for (double v : ev.values) EXPECT_EQ(v, 0.0);
}

TEST(Eigenvalues, MatchClosedFormOracle) {
  Rng rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  Frame f;
  for (int i = 0; i < 500; ++i)
    f.points.push_back(make_point(10 + 3 * g(rng), g(rng) + 0.5 * g(rng), 0.2 * g(rng)));
  const Eigen::Matrix3d cov = point_covariance(f.points);
  const Eigenvalues3 ev = covariance_eigenvalues(f);
  EXPECT_NEAR(ev.values[0] + ev.values[1] + ev.values[2], cov.trace(), 1e-9);
  const oracle::Sym3 s{cov(0, 0), cov(1, 1), cov(2, 2), cov(0, 1), cov(0, 2), cov(1, 2)};
  const auto want = oracle::eigenvalues(s);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ev.values[i], static_cast<double>(want[i]), 1e-8);
  EXPECT_GE(ev.values[0], ev.values[1]);
  EXPECT_GE(ev.values[1], ev.values[2]);
}

TEST(Eigen3Oracle, KnownMatrix) {
  // [[2,1,0],[1,2,0],[0,0,5]] has eigenvalues 5, 3, 1.
  const auto e = oracle::eigenvalues({2, 2, 5, 1, 0, 0});
  EXPECT_NEAR(static_cast<double>(e[0]), 5.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(e[1]), 3.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(e[2]), 1.0, 1e-15);
}

TEST(ExtractFeatures, EmptyFrameIsAllMasked) {
  const FeatureVector fv = extract_features(Frame{});
  EXPECT_TRUE(fv.fully_masked());
  for (double v : fv.f) EXPECT_EQ(v, 0.0);
}

TEST(ExtractFeatures, EmptyRoiIsAllMasked) {
  Frame f;
  f.points = {make_point(30, 0, 0), make_point(5, 3, 0)};
  EXPECT_TRUE(extract_features(f).fully_masked());
  EXPECT_FALSE(extract_features(f, {RoiBounds{}, false}).fully_masked());
}

TEST(ExtractFeatures, Singleton) {
  Frame f;
  f.points = {make_point(5, 0, 0, 1, 10)};
  const FeatureVector fv = extract_features(f);
  EXPECT_EQ(fv[kN1], 1);
  EXPECT_EQ(fv[kN2], 0);
  EXPECT_EQ(fv[kN3], 0);
  EXPECT_EQ(fv[kMeanRange1], 5);
  EXPECT_EQ(fv[kMeanEcho], 1);
  EXPECT_EQ(fv[kVarEcho], 0);
  EXPECT_EQ(fv[kMeanRange], 5);
  EXPECT_EQ(fv[kMeanPulse], 10);
  EXPECT_EQ(fv[kVarPulse], 0);
  for (std::size_t i = kEigen1; i <= kEigen3; ++i) EXPECT_EQ(fv[i], 0);
  EXPECT_TRUE(fv.mask[kMeanRange2]);
  EXPECT_TRUE(fv.mask[kMeanRange3]);
  EXPECT_FALSE(fv.mask[kMeanRange1]);
}

TEST(ExtractFeatures, EchoOneOnly) {
  Rng rng(13);
  Frame f = support::random_roi_frame(rng, 20, 50);
  for (Point& p : f.points) p.echo = 1;
  const FeatureVector fv = extract_features(f);
  EXPECT_EQ(fv[kMeanEcho], 1);
  EXPECT_EQ(fv[kVarEcho], 0);
  EXPECT_EQ(fv[kN2], 0);
  EXPECT_EQ(fv[kN3], 0);
  EXPECT_TRUE(fv.mask[kMeanRange2]);
  EXPECT_TRUE(fv.mask[kMeanRange3]);
}

TEST(ExtractFeatures, MatchesStraightLineOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Frame f = support::random_frame(rng, 1000);
    const FeatureVector fv = extract_features(f);
    const oracle::Features want = oracle::features(support::raw(f), 20.0, -1.5, 1.5);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      EXPECT_EQ(fv.mask[i], want.mask[i]) << "feature " << i + 1;
      EXPECT_LE(support::rel_err(fv.f[i], want.f[i]), 1e-9) << "feature " << i + 1;
    }
  }
}

TEST(ExtractFeatures, CountsSumToRoiSize) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const Frame f = support::random_frame(rng, 600);
    const FeatureVector fv = extract_features(f);
    EXPECT_EQ(fv[kN1] + fv[kN2] + fv[kN3], static_cast<double>(roi_filter(f, {}).points.size()));
  }
}

TEST(ExtractFeatures, OrderInvariant) {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    Frame f = support::random_roi_frame(rng, 50, 400);
    const FeatureVector a = extract_features(f);
    std::shuffle(f.points.begin(), f.points.end(), rng);
    const FeatureVector b = extract_features(f);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      EXPECT_EQ(a.mask[j], b.mask[j]);
      EXPECT_LE(support::rel_err(a.f[j], b.f[j]), 1e-12) << "feature " << j + 1;
    }
  }
}

TEST(ExtractFeatures, ScalingBehaviour) {
  Rng rng(19);
  const double s = 0.75;
  const Frame f = support::random_roi_frame(rng, 100, 300);
  Frame g = f;
  for (Point& p : g.points) p = make_point(p.x * s, p.y * s, p.z * s, p.echo, p.pulse);
  const FeatureVector a = extract_features(f, {RoiBounds{}, false});
  const FeatureVector b = extract_features(g, {RoiBounds{}, false});
  for (std::size_t i : {kN1, kN2, kN3, kMeanEcho, kVarEcho, kVarPulse, kMeanPulse, kMeanAzimuth,
                        kMeanElevation})
    EXPECT_LE(support::rel_err(b.f[i], a.f[i]), 1e-12) << "feature " << i + 1;
  for (std::size_t i : {kMeanRange1, kMeanRange2, kMeanRange3, kMeanRange})
    EXPECT_LE(support::rel_err(b.f[i], s * a.f[i]), 1e-12) << "feature " << i + 1;
  for (std::size_t i : {kEigen1, kEigen2, kEigen3})
    EXPECT_LE(support::rel_err(b.f[i], s * s * a.f[i]), 1e-9) << "feature " << i + 1;
}

TEST(ExtractFeatures, InvariantsHold) {
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    const FeatureVector fv = extract_features(support::random_frame(rng, 500));
    EXPECT_GE(fv[kVarEcho], 0.0);
    EXPECT_GE(fv[kVarPulse], 0.0);
    EXPECT_GE(fv[kEigen1], fv[kEigen2]);
    EXPECT_GE(fv[kEigen2], fv[kEigen3]);
    EXPECT_GE(fv[kEigen3], 0.0);
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      if (fv.mask[j]) {
        EXPECT_EQ(fv.f[j], 0.0);
      }
  }
}

TEST(ExtractFeatures, AxisVarianceMode) {
  Frame f;
  f.points = {make_point(1, 0, 0), make_point(3, 1, 0)};
  FeatureOptions o;
  o.spread = SpreadMode::axis_variances;
  const FeatureVector fv = extract_features(f, o);
  EXPECT_DOUBLE_EQ(fv[kEigen1], 1.0);
  EXPECT_DOUBLE_EQ(fv[kEigen2], 0.25);
  EXPECT_DOUBLE_EQ(fv[kEigen3], 0.0);
}
