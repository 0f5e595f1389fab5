#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactile/baseline.hpp"
#include "tactile/contact_sim.hpp"
#include "tactile/features.hpp"
#include "tactile/hmm.hpp"
#include "tactile/taxel.hpp"

namespace tactile {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  Cv4,
  ResolutionSweep,
  StateSweep,
  MultivariateCv,
  BaselineCv,
  Generalization,
};
const char* to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& token);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Cv4;
  std::string dataset_path;  // manifest.csv; empty -> generate `gen` in memory
  GenerationSpec gen;
  int folds = 5;
  std::vector<int> n_states = {10};
  std::vector<int> pooling = {1};  // kPoolFull (0) = whole-grid collapse
  FeatureSet feature_set = FeatureSet::Force;
  uint64_t seed = 0;
  std::string out_dir = "reports";
  int jobs = 1;
  double window_s = 1.2;
  TrainConfig train;
  int pca_q = 3;
  int knn_k = 1;

  void validate() const;
};

// Flat key=value text; '#' starts a comment. Errors carry file:line context.
ExperimentConfig parse_config_file(const std::string& path);
// Single key=value assignment (used for CLI overrides); throws ConfigError.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct ConfusionMatrix {
  std::array<std::array<int, kNumCategories>, kNumCategories> counts{};  // [truth][pred]

  void add(Category truth, Category predicted) { counts[int(truth)][int(predicted)] += 1; }
  int total() const;
  int correct() const;
  double accuracy() const;  // in percent
  std::array<double, kNumCategories> per_class_accuracy() const;  // percent, NaN-free (0 when empty)
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

struct CellResult {
  std::string name;
  std::string classifier;
  std::string parameter;  // e.g. "resolution", "states", "holdout", "fold"
  std::string value;
  ConfusionMatrix confusion;
};

struct ExperimentReport {
  std::string kind;
  uint64_t seed = 0;
  std::vector<CellResult> cells;
  ConfusionMatrix headline;  // kind-specific aggregate, written to confusion.csv
  double wall_time_s = 0.0;  // printed, never serialized (reports stay byte-stable)
};

// --- classifier wiring shared by the experiments ---

struct PreparedTrial {
  FeatureSeries feats;
  Category label = Category::RigidFixed;
  Condition cond;
};

std::vector<PreparedTrial> prepare_trials(const Dataset& ds, int pool_factor, double window_s);

enum class ClassifierKind {
  HmmForce,          // univariate left-right HMM on raw f_max
  HmmArea,           // univariate on raw area
  HmmMultivariate,   // 2-D HMM on per-trial scaled (S_Fmax, S_d)
  BaselineSingle,    // PCA(3) + 1-NN on raw force vectors
  BaselineTwoArea,   // PCA + 1-NN on raw (force, area), the stereotyped pairing
  BaselineTwoMotion, // PCA + 1-NN on per-trial scaled (force, motion)
};
const char* to_string(ClassifierKind k);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::HmmForce;
  TrainConfig train;
  int pca_q = 3;
  int knn_k = 1;
};

struct TrainedClassifier {
  ClassifierConfig cfg;
  HmmBank bank;
  FeatureSet set = FeatureSet::Force;
  PcaModel pca;
  std::vector<LabeledPoint> points;
  std::vector<Channel> channels;
  bool scale_channels = false;
  int vec_len = 0;
};

TrainedClassifier train_classifier(const ClassifierConfig& cfg,
                                   const std::vector<const PreparedTrial*>& training);
Category predict(const TrainedClassifier& model, const PreparedTrial& trial);

// Seeded stratified fold assignment; folds are disjoint and cover the set.
std::vector<int> stratified_folds(const std::vector<PreparedTrial>& trials, int folds,
                                  uint64_t seed);

// Train on folds-1, score the held-out fold, aggregate the confusion matrix.
ConfusionMatrix cross_validate(const std::vector<PreparedTrial>& trials,
                               const ClassifierConfig& classifier, int folds, uint64_t seed,
                               int jobs = 1);

// --- experiment drivers ---

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// confusion.csv, summary.csv and report.json under out_dir.
void write_report_files(const ExperimentReport& report, const std::string& out_dir);

// Run + write + print; returns a process exit status.
int run(const ExperimentConfig& cfg);

}  // namespace tactile
