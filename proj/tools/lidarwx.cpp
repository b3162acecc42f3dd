// lidarwx: synthetic dataset generation, feature extraction, weather
// classifier training/evaluation, per-frame classification and object
// density summaries.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lidarwx/lidarwx.hpp"

namespace {

using namespace lidarwx;

constexpr const char* kConfigEnv = "LIDARWX_CONFIG";

struct CommonFlags {
  RoiBounds roi;
  std::uint64_t seed = 42;
  std::string config;
  CLI::Option* roi_x = nullptr;
  CLI::Option* roi_ymin = nullptr;
  CLI::Option* roi_ymax = nullptr;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* cmd) {
    roi_x = cmd->add_option("--roi-x-max", roi.x_max, "ROI forward limit [m]")->capture_default_str();
    roi_ymin = cmd->add_option("--roi-y-min", roi.y_min, "ROI right limit [m]")->capture_default_str();
    roi_ymax = cmd->add_option("--roi-y-max", roi.y_max, "ROI left limit [m]")->capture_default_str();
    seed_opt = cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--config", config,
                    std::string("simulation config file (default: $") + kConfigEnv + ")");
  }

  bool roi_given() const { return roi_x->count() || roi_ymin->count() || roi_ymax->count(); }

  std::string config_path() const {
    if (!config.empty()) return config;
    if (const char* env = std::getenv(kConfigEnv)) return env;
    return {};
  }
};

SimConfig load_config_or_default(const CommonFlags& flags) {
  const std::string path = flags.config_path();
  return path.empty() ? default_sim_config() : load_sim_config(path);
}

int run_synth(const CommonFlags& flags, const std::string& out, std::optional<std::size_t> frames,
              unsigned jobs, bool print_config, const std::string& csv) {
  SimConfig cfg = load_config_or_default(flags);
  if (flags.seed_opt->count()) cfg.seed = flags.seed;
  if (frames) cfg.frames_per_cell = *frames;
  if (print_config) {
    std::cout << sim_config_to_json(cfg).dump(2) << "\n";
    return 0;
  }
  if (out.empty()) throw InvalidArgument("synth: --out is required");
  const auto samples =
      generate_dataset(cfg.scenes, cfg.profiles, cfg.frames_per_cell, cfg.seed, cfg.channel, jobs);
  const auto records = to_records(samples);
  write_frames(out, records);
  if (!csv.empty()) write_text_file(csv, frames_to_csv(records));
  std::cerr << "synth: wrote " << records.size() << " frames (" << cfg.scenes.size()
            << " scenes x " << cfg.profiles.size() << " profiles x " << cfg.frames_per_cell
            << ") to " << out << "\n";
  return 0;
}

int run_extract(const CommonFlags& flags, const std::string& in, const std::string& out,
                unsigned jobs, bool full_cloud, const std::string& spread) {
  flags.roi.validate();
  FeatureOptions opts;
  opts.roi = flags.roi;
  opts.apply_roi = !full_cloud;
  opts.spread = spread == "axis" ? SpreadMode::axis_variances : SpreadMode::joint_eigenvalues;
  const auto samples = extract_samples(read_frames(in), opts, jobs);
  write_text_file(out, format_feature_table(samples));
  std::cerr << "extract: wrote " << samples.size() << " feature rows to " << out << "\n";
  return 0;
}

int run_train(const CommonFlags& flags, const std::string& features, const std::string& out,
              const std::string& classifier, std::size_t k, double c, double gamma,
              const std::string& kernel, double split_fraction, const std::string& test_out) {
  flags.roi.validate();
  auto samples = parse_feature_table(read_text_file(features));
  std::vector<LabeledSample> train = samples;
  if (split_fraction < 1.0) {
    Split split = split_by_scenario(samples, split_fraction);
    std::cerr << "train: scenario split train {";
    for (const auto& s : split.train_scenarios) std::cerr << " " << s;
    std::cerr << " } test {";
    for (const auto& s : split.test_scenarios) std::cerr << " " << s;
    std::cerr << " }: " << split.train.size() << " / " << split.test.size() << " samples\n";
    train = std::move(split.train);
    if (!test_out.empty()) write_text_file(test_out, format_feature_table(split.test));
  } else if (!test_out.empty()) {
    throw InvalidArgument("train: --test-out needs --split-fraction below 1");
  }

  TrainOptions opts;
  if (classifier == "knn") opts.kind = ClassifierKind::knn;
  else if (classifier == "svm") opts.kind = ClassifierKind::svm;
  else throw InvalidArgument("unknown classifier '" + classifier + "'");
  opts.k = k;
  opts.svm.c = c;
  opts.svm.gamma = gamma;
  opts.svm.kernel = kernel == "linear" ? KernelKind::linear : KernelKind::rbf;
  FeatureOptions fopts;
  fopts.roi = flags.roi;
  const ClassifierModel model = train_classifier(train, opts, fopts);
  save_model(out, model);
  std::cerr << "train: " << to_string(model.kind) << " model on " << train.size()
            << " samples written to " << out << "\n";
  return 0;
}

FeatureOptions model_features(const ClassifierModel& model, const CommonFlags& flags) {
  FeatureOptions f = model.features;
  if (flags.roi_given()) {
    flags.roi.validate();
    f.roi = flags.roi;
  }
  return f;
}

int run_evaluate(const CommonFlags& flags, const std::string& model_path,
                 const std::string& features, const std::string& frames, const std::string& out,
                 const std::string& csv, const std::string& convention) {
  const ClassifierModel model = load_model(model_path);
  std::vector<LabeledSample> samples;
  if (!features.empty() == !frames.empty())
    throw InvalidArgument("evaluate: give exactly one of --features or --frames");
  if (!features.empty()) samples = parse_feature_table(read_text_file(features));
  else samples = extract_samples(read_frames(frames), model_features(model, flags));
  const FprConvention conv =
      convention == "complement" ? FprConvention::complement : FprConvention::one_vs_rest;
  const EvalReport rep = evaluate_model(model, samples, conv);
  const std::string table = format_report_table(rep);
  std::cout << table;
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (!out.empty()) write_text_file(out, table);
  if (!csv.empty()) write_text_file(csv, format_report_csv(rep));
  return 0;
}

int run_classify(const CommonFlags& flags, const std::string& model_path, const std::string& in,
                 bool fixed_latency) {
  const ClassifierModel model = load_model(model_path);
  const FeatureOptions fopts = model_features(model, flags);
  const auto records = read_frames(in);
  for (const auto& r : records) {
    const auto t0 = std::chrono::steady_clock::now();
    const WeatherLabel label = model.predict(extract_features(r.frame, fopts));
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cout << r.frame.k << "," << to_string(label) << "," << (fixed_latency ? 0 : us) << "\n";
  }
  return 0;
}

int run_density(const CommonFlags& flags, const std::string& in, std::int32_t object,
                const std::string& scenario, double fog_bin, const std::string& out) {
  auto records = read_frames(in);
  if (flags.roi_given()) {
    flags.roi.validate();
    for (auto& r : records) r.frame = roi_filter(r.frame, flags.roi);
  }
  const std::string csv = format_density_csv(density_by_condition(records, object, scenario, fog_bin));
  if (out.empty()) std::cout << csv;
  else write_text_file(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lidar weather classification toolkit"};
  app.require_subcommand(1);

  CommonFlags synth_flags, extract_flags, train_flags, eval_flags, classify_flags, density_flags;

  auto* synth = app.add_subcommand("synth", "simulate a labeled multi-echo dataset");
  synth_flags.add(synth);
  std::string synth_out, synth_csv;
  std::optional<std::size_t> synth_frames;
  unsigned synth_jobs = 1;
  bool print_config = false;
  synth->add_option("--out,-o", synth_out, "output frame file (LWPC1)");
  synth->add_option("--frames-per-cell", synth_frames, "frames per scene x profile cell");
  synth->add_option("--jobs,-j", synth_jobs, "worker threads (0 = all cores)")->capture_default_str();
  synth->add_option("--csv", synth_csv, "also export points as CSV");
  synth->add_flag("--print-config", print_config, "print the effective configuration and exit");

  auto* extract = app.add_subcommand("extract", "compute the feature table of a frame file");
  extract_flags.add(extract);
  std::string extract_in, extract_out, spread = "joint";
  unsigned extract_jobs = 1;
  bool full_cloud = false;
  extract->add_option("--in,-i", extract_in, "input frame file")->required();
  extract->add_option("--out,-o", extract_out, "output feature CSV")->required();
  extract->add_option("--jobs,-j", extract_jobs, "worker threads (0 = all cores)")->capture_default_str();
  extract->add_flag("--full-cloud", full_cloud, "skip ROI filtering");
  extract->add_option("--spread", spread, "spread features: joint eigenvalues or axis variances")
      ->check(CLI::IsMember({"joint", "axis"}))
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "train a kNN or SVM weather classifier");
  train_flags.add(train);
  std::string train_features, train_out, classifier = "svm", kernel = "rbf", test_out;
  std::size_t k = 10;
  double c = 1.0, gamma = 0.0, split_fraction = 0.8;
  train->add_option("--features,-f", train_features, "feature CSV")->required();
  train->add_option("--out,-o", train_out, "output model file")->required();
  train->add_option("--classifier", classifier)->check(CLI::IsMember({"knn", "svm"}))->capture_default_str();
  train->add_option("--k", k, "kNN neighbours")->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--c", c, "SVM box constraint")->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--gamma", gamma, "RBF width (0 = median heuristic)")->capture_default_str();
  train->add_option("--kernel", kernel)->check(CLI::IsMember({"rbf", "linear"}))->capture_default_str();
  train->add_option("--split-fraction", split_fraction,
                    "scenario-disjoint train share; 1 trains on everything")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--test-out", test_out, "write the held-out feature rows here");

  auto* evaluate = app.add_subcommand("evaluate", "per-class TPR/FPR/IoU report");
  eval_flags.add(evaluate);
  std::string eval_model, eval_features, eval_frames, eval_out, eval_csv, convention = "ovr";
  evaluate->add_option("--model,-m", eval_model, "model file")->required();
  evaluate->add_option("--features,-f", eval_features, "labeled feature CSV");
  evaluate->add_option("--frames", eval_frames, "labeled frame file (features extracted on the fly)");
  evaluate->add_option("--out,-o", eval_out, "write the text report here");
  evaluate->add_option("--csv", eval_csv, "write the CSV report here");
  evaluate->add_option("--fpr-convention", convention, "one-vs-rest or 100 - TPR")
      ->check(CLI::IsMember({"ovr", "complement"}))
      ->capture_default_str();

  auto* classify = app.add_subcommand("classify", "stream frame_index,label,latency_us");
  classify_flags.add(classify);
  std::string classify_model, classify_in;
  bool fixed_latency = false;
  classify->add_option("--model,-m", classify_model, "model file")->required();
  classify->add_option("--in,-i", classify_in, "frame file")->required();
  classify->add_flag("--fixed-latency", fixed_latency, "print 0 instead of measured latency");

  auto* density = app.add_subcommand("density", "object point density boxplot CSV");
  density_flags.add(density);
  std::string density_in, density_scenario, density_out;
  std::int32_t object = kPedestrianId;
  double fog_bin = 10.0;
  density->add_option("--in,-i", density_in, "frame file")->required();
  density->add_option("--object", object, "object id")->capture_default_str();
  density->add_option("--scenario", density_scenario, "restrict to one scenario id");
  density->add_option("--fog-bin", fog_bin, "visibility bin width [m]")->capture_default_str();
  density->add_option("--out,-o", density_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth)
      return run_synth(synth_flags, synth_out, synth_frames, synth_jobs, print_config, synth_csv);
    if (*extract)
      return run_extract(extract_flags, extract_in, extract_out, extract_jobs, full_cloud, spread);
    if (*train)
      return run_train(train_flags, train_features, train_out, classifier, k, c, gamma, kernel,
                       split_fraction, test_out);
    if (*evaluate)
      return run_evaluate(eval_flags, eval_model, eval_features, eval_frames, eval_out, eval_csv,
                          convention);
    if (*classify) return run_classify(classify_flags, classify_model, classify_in, fixed_latency);
    if (*density)
      return run_density(density_flags, density_in, object, density_scenario, fog_bin, density_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
