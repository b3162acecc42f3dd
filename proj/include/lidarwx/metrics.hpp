#pragma once

// Confusion-matrix evaluation (per-class TPR, FPR, IoU and mean IoU) and the
// per-object point density used to quantify perception degradation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/core.hpp"
#include "lidarwx/stats.hpp"

namespace lidarwx {

/// cells[i][j] counts samples with truth i predicted as j.
struct ConfusionMatrix {
  std::vector<std::vector<std::uint64_t>> cells;

  std::size_t classes() const { return cells.size(); }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : cells)
      for (auto v : row) t += v;
    return t;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths,
                                        std::size_t class_count) {
  if (predictions.size() != truths.size())
    throw InvalidArgument("confusion_matrix: " + std::to_string(predictions.size()) +
                          " predictions vs " + std::to_string(truths.size()) + " truths");
  ConfusionMatrix cm;
  cm.cells.assign(class_count, std::vector<std::uint64_t>(class_count, 0));
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = predictions[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= class_count ||
        static_cast<std::size_t>(p) >= class_count)
      throw InvalidArgument("confusion_matrix: label out of range");
    ++cm.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

// How the false positive rate is defined for multi-class reports.
enum class FprConvention : std::uint8_t {
  one_vs_rest,  // FP / (FP + TN), TN counted one-vs-rest
  complement,   // 100 - TPR (the share of the class's samples that were missed)
};

struct ClassMetrics {
  std::uint64_t samples = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  double tpr = 0.0;  // percent
  double fpr = 0.0;  // percent, per the report's convention
  double fpr_one_vs_rest = 0.0;
  double fpr_complement = 0.0;
  double iou = 0.0;  // percent
  bool masked = false;  // class had no samples
};

struct EvalReport {
  std::vector<ClassMetrics> classes;
  double mean_iou = 0.0;  // percent, unweighted over unmasked classes
  FprConvention fpr_convention = FprConvention::one_vs_rest;
  std::vector<std::string> warnings;
};

inline EvalReport class_metrics(const ConfusionMatrix& cm,
                                FprConvention convention = FprConvention::one_vs_rest) {
  const std::size_t n = cm.classes();
  for (const auto& row : cm.cells)
    if (row.size() != n) throw InvalidArgument("class_metrics: confusion matrix is not square");
  EvalReport rep;
  rep.fpr_convention = convention;
  const std::uint64_t total = cm.total();
  double iou_sum = 0.0;
  std::size_t iou_count = 0;
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    for (std::size_t j = 0; j < n; ++j) {
      m.samples += cm.cells[c][j];
      if (j != c) {
        m.fn += cm.cells[c][j];
        m.fp += cm.cells[j][c];
      }
    }
    m.tp = cm.cells[c][c];
    m.tn = total - m.tp - m.fn - m.fp;
    if (m.samples == 0) {
      m.masked = true;
      rep.warnings.push_back("class " + std::to_string(c + 1) +
                             " has no samples; excluded from mean IoU");
    } else {
      m.tpr = 100.0 * static_cast<double>(m.tp) / static_cast<double>(m.samples);
      m.fpr_complement = 100.0 - m.tpr;
      m.iou = 100.0 * static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp + m.fn);
      iou_sum += m.iou;
      ++iou_count;
    }
    if (m.fp + m.tn > 0)
      m.fpr_one_vs_rest = 100.0 * static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
    m.fpr = convention == FprConvention::one_vs_rest ? m.fpr_one_vs_rest : m.fpr_complement;
    rep.classes.push_back(m);
  }
  rep.mean_iou = iou_count ? iou_sum / static_cast<double>(iou_count) : 0.0;
  return rep;
}

/// Integer with thousands separators, e.g. 92708 -> "92,708".
inline std::string group_thousands(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Aligned text table: class, # samples, TPR, FPR, IoU, then the mean IoU.
inline std::string format_report_table(const EvalReport& rep) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%5s  %9s  %8s  %8s  %8s\n", "class", "# samples", "TPR [%]",
                "FPR [%]", "IoU [%]");
  out += line;
  for (std::size_t c = 0; c < rep.classes.size(); ++c) {
    const ClassMetrics& m = rep.classes[c];
    if (m.masked) {
      std::snprintf(line, sizeof line, "%5zu  %9s  %8s  %8s  %8s\n", c + 1,
                    group_thousands(m.samples).c_str(), "--", "--", "--");
    } else {
      std::snprintf(line, sizeof line, "%5zu  %9s  %8s  %8s  %8s\n", c + 1,
                    group_thousands(m.samples).c_str(), fixed2(m.tpr).c_str(),
                    fixed2(m.fpr).c_str(), fixed2(m.iou).c_str());
    }
    out += line;
  }
  out += "mean IoU [%]: " + fixed2(rep.mean_iou) + "\n";
  return out;
}

inline std::string format_report_csv(const EvalReport& rep) {
  std::string out = "class,samples,tp,fp,fn,tn,tpr,fpr,iou\n";
  for (std::size_t c = 0; c < rep.classes.size(); ++c) {
    const ClassMetrics& m = rep.classes[c];
    out += std::to_string(c + 1) + "," + std::to_string(m.samples) + "," + std::to_string(m.tp) +
           "," + std::to_string(m.fp) + "," + std::to_string(m.fn) + "," + std::to_string(m.tn) +
           ",";
    if (m.masked)
      out += ",,\n";
    else
      out += fixed2(m.tpr) + "," + fixed2(m.fpr) + "," + fixed2(m.iou) + "\n";
  }
  out += "mean,,,,,,,," + fixed2(rep.mean_iou) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Object point density

inline std::size_t object_point_count(const Frame& frame, std::int32_t object_id) {
  std::size_t n = 0;
  for (const Point& p : frame.points)
    if (p.object == object_id) ++n;
  return n;
}

/// Mean number of points on the object over reference (clear) frames.
inline double reference_point_count(std::span<const Frame> clear_frames, std::int32_t object_id) {
  if (clear_frames.empty()) throw InvalidArgument("reference_point_count: no reference frames");
  double sum = 0.0;
  for (const Frame& f : clear_frames) sum += static_cast<double>(object_point_count(f, object_id));
  return sum / static_cast<double>(clear_frames.size());
}

struct ObjectDensitySeries {
  std::int32_t object_id = 0;
  double reference_count = 0.0;
  std::vector<double> densities;  // one per frame
  BoxplotStats summary;
};

/// Per-frame object point count divided by the clear-condition mean count.
inline ObjectDensitySeries object_point_density(std::span<const Frame> frames,
                                                std::int32_t object_id, double reference_count) {
  if (!(reference_count > 0.0))
    throw InvalidArgument("object_point_density: reference mean count must be > 0");
  ObjectDensitySeries s;
  s.object_id = object_id;
  s.reference_count = reference_count;
  s.densities.reserve(frames.size());
  for (const Frame& f : frames)
    s.densities.push_back(static_cast<double>(object_point_count(f, object_id)) / reference_count);
  if (!s.densities.empty()) s.summary = boxplot_stats(s.densities);
  return s;
}

}  // namespace lidarwx
