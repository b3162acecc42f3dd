#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/error.hpp"
#include "lidarwx/standardizer.hpp"

namespace lidarwx {

/// Brute-force k-nearest-neighbour classifier over standardized features.
///
/// Neighbours are ranked by (squared distance, label, feature values), an
/// order that does not depend on the training-set order. The prediction is
/// the majority label of the first k; a vote tie goes to the tied class whose
/// best-ranked member comes first.
struct KnnModel {
  std::size_t k = 10;
  std::vector<std::vector<double>> samples;  // standardized
  std::vector<int> labels;                   // class indices

  friend bool operator==(const KnnModel&, const KnnModel&) = default;
};

inline KnnModel knn_train(std::vector<std::vector<double>> standardized, std::vector<int> labels,
                          std::size_t k = 10) {
  if (standardized.empty()) throw InvalidArgument("knn_train: empty training set");
  if (standardized.size() != labels.size()) throw InvalidArgument("knn_train: label count mismatch");
  if (k < 1) throw InvalidArgument("knn_train: k must be >= 1");
  if (k > standardized.size())
    throw InvalidArgument("knn_train: k = " + std::to_string(k) + " exceeds training size " +
                          std::to_string(standardized.size()));
  return {k, std::move(standardized), std::move(labels)};
}

namespace detail {

struct Neighbour {
  double d2;
  std::size_t index;
};

}  // namespace detail

/// Predicts a class index for an already standardized query.
inline int knn_predict_standardized(const KnnModel& model, std::span<const double> query) {
  std::vector<detail::Neighbour> nb(model.samples.size());
  for (std::size_t i = 0; i < nb.size(); ++i)
    nb[i] = {squared_distance(model.samples[i], query), i};

  const auto before = [&](const detail::Neighbour& a, const detail::Neighbour& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    const int la = model.labels[a.index];
    const int lb = model.labels[b.index];
    if (la != lb) return la < lb;
    return model.samples[a.index] < model.samples[b.index];
  };
  const std::size_t k = std::min(model.k, nb.size());
  std::partial_sort(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(k), nb.end(), before);

  std::vector<std::size_t> votes;
  std::vector<std::size_t> first_rank;
  for (std::size_t r = 0; r < k; ++r) {
    const auto label = static_cast<std::size_t>(model.labels[nb[r].index]);
    if (label >= votes.size()) {
      votes.resize(label + 1, 0);
      first_rank.resize(label + 1, k);
    }
    if (votes[label]++ == 0) first_rank[label] = r;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && first_rank[c] < first_rank[best]))
      best = c;
  }
  return static_cast<int>(best);
}

}  // namespace lidarwx
