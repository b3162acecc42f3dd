#pragma once

// Weather classifiers over feature vectors: scenario-disjoint splitting and a
// model wrapper that owns the standardizer and the kNN or SVM payload.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lidarwx/core.hpp"
#include "lidarwx/features.hpp"
#include "lidarwx/knn.hpp"
#include "lidarwx/standardizer.hpp"
#include "lidarwx/svm.hpp"

namespace lidarwx {

struct LabeledSample {
  FeatureVector features;
  GroundTruth truth;
  std::string scenario_id;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Split {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
  std::vector<std::string> train_scenarios;
  std::vector<std::string> test_scenarios;
};

namespace detail {

// Advances `idx` (strictly increasing indices < n) to the previous
// combination in lexicographic order. Returns false after the first one.
inline bool prev_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t pos = k; pos-- > 0;) {
    const std::size_t floor = pos == 0 ? 0 : idx[pos - 1] + 1;
    if (idx[pos] > floor) {
      --idx[pos];
      for (std::size_t q = pos + 1; q < k; ++q) idx[q] = n - (k - q);
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Partitions samples so that no scenario contributes to both sides.
///
/// Scenario ids are sorted; round((1 - train_fraction) * S) of them (at least
/// one, at most S - 1) go to the test side. Candidate test sets are tried
/// from the lexicographically last combination downwards and the first one
/// that leaves every class on both sides wins, so {A, B, C} at 0.8 yields
/// train {A, B}, test {C}.
inline Split split_by_scenario(const std::vector<LabeledSample>& samples,
                               double train_fraction = 0.8) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("split_by_scenario: train_fraction must lie in (0, 1)");
  std::map<std::string, std::set<WeatherLabel>> classes_of;
  std::set<WeatherLabel> all_classes;
  for (const auto& s : samples) {
    classes_of[s.scenario_id].insert(s.truth.label);
    all_classes.insert(s.truth.label);
  }
  std::vector<std::string> ids;
  for (const auto& [id, _] : classes_of) ids.push_back(id);
  const std::size_t count = ids.size();
  if (count < 2) throw InfeasibleSplit("split_by_scenario: need at least two distinct scenarios");

  const auto n_test = static_cast<std::size_t>(std::clamp<long>(
      std::lround((1.0 - train_fraction) * static_cast<double>(count)), 1L,
      static_cast<long>(count) - 1));

  std::vector<std::size_t> idx(n_test);
  for (std::size_t q = 0; q < n_test; ++q) idx[q] = count - n_test + q;
  do {
    std::set<WeatherLabel> test_classes, train_classes;
    std::vector<bool> is_test(count, false);
    for (std::size_t q : idx) is_test[q] = true;
    for (std::size_t s = 0; s < count; ++s) {
      auto& dst = is_test[s] ? test_classes : train_classes;
      dst.insert(classes_of[ids[s]].begin(), classes_of[ids[s]].end());
    }
    if (test_classes == all_classes && train_classes == all_classes) {
      Split out;
      std::set<std::string> test_ids;
      for (std::size_t s = 0; s < count; ++s) {
        (is_test[s] ? out.test_scenarios : out.train_scenarios).push_back(ids[s]);
        if (is_test[s]) test_ids.insert(ids[s]);
      }
      for (const auto& smp : samples) (test_ids.count(smp.scenario_id) ? out.test : out.train).push_back(smp);
      return out;
    }
  } while (detail::prev_combination(idx, count));
  throw InfeasibleSplit(
      "split_by_scenario: no scenario-disjoint split keeps every class on both sides");
}

enum class ClassifierKind : std::uint8_t { knn = 0, svm = 1 };

inline std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::knn ? "knn" : "svm"; }

struct TrainOptions {
  ClassifierKind kind = ClassifierKind::svm;
  std::size_t k = 10;
  SvmParams svm;
};

struct ClassifierModel {
  ClassifierKind kind = ClassifierKind::knn;
  FeatureOptions features;  // extraction settings the model was trained with
  Standardizer standardizer;
  std::variant<KnnModel, SvmModel> payload;

  WeatherLabel predict(const FeatureVector& fv) const {
    const std::vector<double> z = standardizer.transform(fv.f);
    const int cls = kind == ClassifierKind::knn
                        ? knn_predict_standardized(std::get<KnnModel>(payload), z)
                        : svm_predict_standardized(std::get<SvmModel>(payload), z);
    return label_from_index(cls);
  }

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

inline ClassifierModel train_classifier(const std::vector<LabeledSample>& train,
                                        const TrainOptions& opts,
                                        const FeatureOptions& features = {}) {
  if (train.empty()) throw InvalidArgument("train_classifier: empty training set");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  rows.reserve(train.size());
  for (const auto& s : train) {
    rows.emplace_back(s.features.f.begin(), s.features.f.end());
    labels.push_back(label_index(s.truth.label));
  }
  ClassifierModel model;
  model.kind = opts.kind;
  model.features = features;
  model.standardizer = Standardizer::fit(rows);
  for (auto& r : rows) r = model.standardizer.transform(r);
  if (opts.kind == ClassifierKind::knn)
    model.payload = knn_train(std::move(rows), std::move(labels), opts.k);
  else
    model.payload = svm_train(rows, labels, opts.svm);
  return model;
}

}  // namespace lidarwx
