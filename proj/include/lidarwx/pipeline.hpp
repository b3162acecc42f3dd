#pragma once

// Orchestration shared by the command-line tool and the integration tests:
// frames -> features -> classifier -> report, and density summaries.

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "lidarwx/classifier.hpp"
#include "lidarwx/features.hpp"
#include "lidarwx/frame_io.hpp"
#include "lidarwx/metrics.hpp"
#include "lidarwx/rng.hpp"

namespace lidarwx {

/// Features for every labeled record, in record order. Unlabeled records are
/// rejected since the table needs a label column.
inline std::vector<LabeledSample> extract_samples(const std::vector<FrameRecord>& records,
                                                  const FeatureOptions& opts = {},
                                                  unsigned jobs = 1) {
  std::vector<LabeledSample> out(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const FrameRecord& r = records[i];
    if (!r.truth) throw InvalidArgument("frame " + std::to_string(r.frame.k) + " has no label");
    out[i] = {extract_features(r.frame, opts), *r.truth, r.scenario_id};
  });
  return out;
}

inline std::vector<int> predict_indices(const ClassifierModel& model,
                                        const std::vector<LabeledSample>& samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(label_index(model.predict(s.features)));
  return out;
}

inline EvalReport evaluate_model(const ClassifierModel& model,
                                 const std::vector<LabeledSample>& samples,
                                 FprConvention convention = FprConvention::one_vs_rest) {
  std::vector<int> truths;
  truths.reserve(samples.size());
  for (const auto& s : samples) truths.push_back(label_index(s.truth.label));
  const std::vector<int> preds = predict_indices(model, samples);
  return class_metrics(confusion_matrix(preds, truths, kAllLabels.size()), convention);
}

/// Condition name used to group density series: "clear", "rain_R55",
/// "fog_V20-30" (visibility binned by `fog_bin` metres).
inline std::string condition_name(const GroundTruth& gt, double fog_bin = 10.0) {
  char buf[64];
  switch (gt.label) {
    case WeatherLabel::clear:
      return "clear";
    case WeatherLabel::rain:
      std::snprintf(buf, sizeof buf, "rain_R%g", gt.rainfall_rate.value_or(0.0));
      return buf;
    case WeatherLabel::fog: {
      const double v = gt.visibility.value_or(0.0);
      if (!(fog_bin > 0.0)) {
        std::snprintf(buf, sizeof buf, "fog_V%g", v);
        return buf;
      }
      const double lo = std::floor(v / fog_bin) * fog_bin;
      std::snprintf(buf, sizeof buf, "fog_V%g-%g", lo, lo + fog_bin);
      return buf;
    }
  }
  return "unknown";
}

struct ConditionDensity {
  std::string condition;
  ObjectDensitySeries series;
};

/// Object density per condition. Each frame is normalised by the object's
/// mean point count over the clear frames of its own scenario, so every
/// scenario's clear frames average exactly 1. `scenario` limits the selection
/// when non-empty. Scenarios whose clear frames never show the object are
/// skipped. The reported reference count is the mean over scenarios.
inline std::vector<ConditionDensity> density_by_condition(const std::vector<FrameRecord>& records,
                                                          std::int32_t object_id,
                                                          const std::string& scenario = {},
                                                          double fog_bin = 10.0) {
  std::map<std::string, std::vector<Frame>> clear_by_scenario;
  for (const auto& r : records) {
    if (!r.truth || (!scenario.empty() && r.scenario_id != scenario)) continue;
    if (r.truth->label == WeatherLabel::clear) clear_by_scenario[r.scenario_id].push_back(r.frame);
  }
  if (clear_by_scenario.empty()) throw InvalidArgument("density: selection contains no clear frames");
  std::map<std::string, double> reference;
  double ref_sum = 0.0;
  for (const auto& [id, frames] : clear_by_scenario) {
    const double ref = reference_point_count(frames, object_id);
    if (!(ref > 0.0)) continue;
    reference[id] = ref;
    ref_sum += ref;
  }
  if (reference.empty())
    throw InvalidArgument("density: object " + std::to_string(object_id) +
                          " has no points in any clear frame of the selection");
  const double ref_mean = ref_sum / static_cast<double>(reference.size());

  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.truth || (!scenario.empty() && r.scenario_id != scenario)) continue;
    const auto ref = reference.find(r.scenario_id);
    if (ref == reference.end()) continue;
    groups[condition_name(*r.truth, fog_bin)].push_back(
        static_cast<double>(object_point_count(r.frame, object_id)) / ref->second);
  }
  std::vector<ConditionDensity> out;
  for (auto& [name, densities] : groups) {
    ConditionDensity row{name, {}};
    row.series.object_id = object_id;
    row.series.reference_count = ref_mean;
    row.series.summary = boxplot_stats(densities);
    row.series.densities = std::move(densities);
    out.push_back(std::move(row));
  }
  return out;
}

inline std::string format_density_csv(const std::vector<ConditionDensity>& rows) {
  std::string out =
      "condition,frames,reference_count,mean,median,q1,q3,whisker_low,whisker_high,outliers\n";
  char buf[512];
  for (const auto& row : rows) {
    const BoxplotStats& s = row.series.summary;
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,", row.condition.c_str(),
                  s.count, row.series.reference_count, s.mean, s.median, s.q1, s.q3, s.whisker_low,
                  s.whisker_high);
    out += buf;
    for (std::size_t i = 0; i < s.outliers.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f", i ? ";" : "", s.outliers[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace lidarwx
