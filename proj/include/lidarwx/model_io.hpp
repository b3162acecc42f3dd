#pragma once

// Classifier model files: JSON text with a magic string and schema version.
// Doubles are written in shortest round-trip form, so models reload exactly.
//
// {
//   "magic": "LIDARWX-MODEL", "schema_version": 1, "kind": "knn" | "svm",
//   "features": {"roi": {"x_max", "y_min", "y_max"}, "apply_roi", "spread"},
//   "standardizer": {"mean": [16], "stddev": [16], "constant": [16]},
//   "knn": {"k", "labels": [n], "samples": [n][16]},
//   "svm": {"kernel": "rbf" | "linear", "gamma", "c", "classes": [m],
//           "pairs": [{"positive", "negative", "bias", "iterations",
//                      "coef": [s], "support_vectors": [s][16]}]}
// }
// Class numbers in the file are 1 clear, 2 rain, 3 fog.

#include <string>

#include <nlohmann/json.hpp>

#include "lidarwx/classifier.hpp"
#include "lidarwx/error.hpp"
#include "lidarwx/feature_table.hpp"

namespace lidarwx {

inline constexpr const char* kModelMagic = "LIDARWX-MODEL";
inline constexpr int kModelSchemaVersion = 1;

inline nlohmann::json feature_options_to_json(const FeatureOptions& f) {
  return {{"roi", {{"x_max", f.roi.x_max}, {"y_min", f.roi.y_min}, {"y_max", f.roi.y_max}}},
          {"apply_roi", f.apply_roi},
          {"spread", f.spread == SpreadMode::joint_eigenvalues ? "joint_eigenvalues" : "axis_variances"}};
}

inline FeatureOptions feature_options_from_json(const nlohmann::json& j) {
  FeatureOptions f;
  f.roi.x_max = j.at("roi").at("x_max").get<double>();
  f.roi.y_min = j.at("roi").at("y_min").get<double>();
  f.roi.y_max = j.at("roi").at("y_max").get<double>();
  f.apply_roi = j.at("apply_roi").get<bool>();
  const auto spread = j.at("spread").get<std::string>();
  if (spread == "joint_eigenvalues") f.spread = SpreadMode::joint_eigenvalues;
  else if (spread == "axis_variances") f.spread = SpreadMode::axis_variances;
  else throw Error("model file: unknown spread mode '" + spread + "'");
  return f;
}

inline std::string serialize_model(const ClassifierModel& m) {
  nlohmann::json j;
  j["magic"] = kModelMagic;
  j["schema_version"] = kModelSchemaVersion;
  j["kind"] = std::string(to_string(m.kind));
  j["features"] = feature_options_to_json(m.features);
  j["standardizer"] = {{"mean", m.standardizer.mean},
                       {"stddev", m.standardizer.stddev},
                       {"constant", m.standardizer.constant}};
  if (m.kind == ClassifierKind::knn) {
    const auto& knn = std::get<KnnModel>(m.payload);
    std::vector<int> labels;
    for (int l : knn.labels) labels.push_back(l + 1);
    j["knn"] = {{"k", knn.k}, {"labels", labels}, {"samples", knn.samples}};
  } else {
    const auto& svm = std::get<SvmModel>(m.payload);
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : svm.pairs) {
      pairs.push_back({{"positive", p.positive + 1},
                       {"negative", p.negative + 1},
                       {"bias", p.bias},
                       {"iterations", p.iterations},
                       {"coef", p.coef},
                       {"support_vectors", p.support_vectors}});
    }
    std::vector<int> classes;
    for (int c : svm.classes) classes.push_back(c + 1);
    j["svm"] = {{"kernel", svm.kernel.kind == KernelKind::rbf ? "rbf" : "linear"},
                {"gamma", svm.kernel.gamma},
                {"c", svm.c},
                {"classes", classes},
                {"pairs", pairs}};
  }
  return j.dump(1) + "\n";
}

inline ClassifierModel deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("magic", "") != kModelMagic)
      throw Error("model file: bad magic");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw Error("model file: unsupported schema version " + std::to_string(version));
    ClassifierModel m;
    const auto kind = j.at("kind").get<std::string>();
    m.features = feature_options_from_json(j.at("features"));
    const auto& st = j.at("standardizer");
    m.standardizer.mean = st.at("mean").get<std::vector<double>>();
    m.standardizer.stddev = st.at("stddev").get<std::vector<double>>();
    m.standardizer.constant = st.at("constant").get<std::vector<bool>>();
    if (m.standardizer.mean.size() != kFeatureCount || m.standardizer.stddev.size() != kFeatureCount ||
        m.standardizer.constant.size() != kFeatureCount)
      throw Error("model file: standardizer must have 16 components");
    for (double s : m.standardizer.stddev)
      if (!(s > 0.0)) throw Error("model file: standardizer stddev must be > 0");

    if (kind == "knn") {
      m.kind = ClassifierKind::knn;
      const auto& kj = j.at("knn");
      KnnModel knn;
      knn.k = kj.at("k").get<std::size_t>();
      knn.samples = kj.at("samples").get<std::vector<std::vector<double>>>();
      for (int l : kj.at("labels").get<std::vector<int>>()) knn.labels.push_back(l - 1);
      if (knn.k < 1 || knn.k > knn.samples.size() || knn.labels.size() != knn.samples.size())
        throw Error("model file: inconsistent kNN payload");
      m.payload = std::move(knn);
    } else if (kind == "svm") {
      m.kind = ClassifierKind::svm;
      const auto& sj = j.at("svm");
      SvmModel svm;
      const auto kernel = sj.at("kernel").get<std::string>();
      if (kernel == "rbf") svm.kernel.kind = KernelKind::rbf;
      else if (kernel == "linear") svm.kernel.kind = KernelKind::linear;
      else throw Error("model file: unknown kernel '" + kernel + "'");
      svm.kernel.gamma = sj.at("gamma").get<double>();
      svm.c = sj.at("c").get<double>();
      if (!(svm.kernel.gamma > 0.0) || !(svm.c > 0.0))
        throw Error("model file: gamma and C must be > 0");
      for (int c : sj.at("classes").get<std::vector<int>>()) svm.classes.push_back(c - 1);
      for (const auto& pj : sj.at("pairs")) {
        BinarySvm p;
        p.positive = pj.at("positive").get<int>() - 1;
        p.negative = pj.at("negative").get<int>() - 1;
        p.bias = pj.at("bias").get<double>();
        p.iterations = pj.at("iterations").get<long>();
        p.coef = pj.at("coef").get<std::vector<double>>();
        p.support_vectors = pj.at("support_vectors").get<std::vector<std::vector<double>>>();
        if (p.coef.size() != p.support_vectors.size())
          throw Error("model file: coefficient/support-vector count mismatch");
        svm.pairs.push_back(std::move(p));
      }
      m.payload = std::move(svm);
    } else {
      throw Error("model file: unknown classifier kind '" + kind + "'");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

inline void save_model(const std::string& path, const ClassifierModel& m) {
  write_text_file(path, serialize_model(m));
}

inline ClassifierModel load_model(const std::string& path) {
  return deserialize_model(read_text_file(path));
}

}  // namespace lidarwx
