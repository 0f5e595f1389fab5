#include "tactile/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "tactile/util.hpp"

namespace tactile {

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(err_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string pooling_token(int factor) {
  return factor == kPoolFull ? "full" : std::to_string(factor);
}

int parse_pooling_token(const std::string& tok) {
  if (tok == "full") return kPoolFull;
  const int f = int(parse_double(tok, "pooling factor"));
  if (f < 1) throw ConfigError("pooling factor must be >= 1 or 'full'");
  return f;
}

ClassifierKind classifier_for(FeatureSet set) {
  switch (set) {
    case FeatureSet::Force: return ClassifierKind::HmmForce;
    case FeatureSet::Area: return ClassifierKind::HmmArea;
    case FeatureSet::ForceMotion: return ClassifierKind::HmmMultivariate;
  }
  return ClassifierKind::HmmForce;
}

std::string condition_token(const Condition& c) {
  return std::string(to_string(c.velocity)) + "-" + to_string(c.stiffness);
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Cv4: return "cv4";
    case ExperimentKind::ResolutionSweep: return "resolution_sweep";
    case ExperimentKind::StateSweep: return "state_sweep";
    case ExperimentKind::MultivariateCv: return "multivariate_cv";
    case ExperimentKind::BaselineCv: return "baseline_cv";
    case ExperimentKind::Generalization: return "generalization";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& token) {
  for (ExperimentKind k : {ExperimentKind::Cv4, ExperimentKind::ResolutionSweep,
                           ExperimentKind::StateSweep, ExperimentKind::MultivariateCv,
                           ExperimentKind::BaselineCv, ExperimentKind::Generalization})
    if (token == to_string(k)) return k;
  throw ConfigError("unknown experiment kind: '" + token + "'");
}

const char* to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::HmmForce: return "hmm_force";
    case ClassifierKind::HmmArea: return "hmm_area";
    case ClassifierKind::HmmMultivariate: return "hmm_multivariate";
    case ClassifierKind::BaselineSingle: return "baseline_single";
    case ClassifierKind::BaselineTwoArea: return "baseline_two_area";
    case ClassifierKind::BaselineTwoMotion: return "baseline_two_motion";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (n_states.empty()) throw ConfigError("states list must not be empty");
  if (pooling.empty()) throw ConfigError("pooling list must not be empty");
  if (window_s <= 0.0) throw ConfigError("window must be positive");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  for (int n : n_states)
    if (n < 2) throw ConfigError("states entries must be >= 2");
  gen.validate();
}

int ConfusionMatrix::total() const {
  int s = 0;
  for (const auto& row : counts)
    for (int v : row) s += v;
  return s;
}

int ConfusionMatrix::correct() const {
  int s = 0;
  for (int c = 0; c < kNumCategories; ++c) s += counts[c][c];
  return s;
}

double ConfusionMatrix::accuracy() const {
  const int n = total();
  return n == 0 ? 0.0 : 100.0 * double(correct()) / double(n);
}

std::array<double, kNumCategories> ConfusionMatrix::per_class_accuracy() const {
  std::array<double, kNumCategories> out{};
  for (int c = 0; c < kNumCategories; ++c) {
    int row = 0;
    for (int p = 0; p < kNumCategories; ++p) row += counts[c][p];
    out[c] = row == 0 ? 0.0 : 100.0 * double(counts[c][c]) / double(row);
  }
  return out;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int i = 0; i < kNumCategories; ++i)
    for (int j = 0; j < kNumCategories; ++j) counts[i][j] += other.counts[i][j];
  return *this;
}

// --- configuration ---

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto as_int = [&](const std::string& v) { return int(parse_double(v, key)); };
  if (key == "kind") {
    cfg.kind = parse_experiment_kind(value);
  } else if (key == "dataset") {
    cfg.dataset_path = value;
  } else if (key == "trials_per_cell") {
    cfg.gen.trials_per_cell = as_int(value);
  } else if (key == "conditions") {
    if (value == "stereotyped") {
      cfg.gen.conditions = {{Setting::None, Setting::None}};
    } else if (value == "matrix") {
      cfg.gen.conditions = {{Setting::Low, Setting::Low},
                            {Setting::Low, Setting::High},
                            {Setting::High, Setting::Low},
                            {Setting::High, Setting::High}};
    } else {
      cfg.gen.conditions.clear();
      for (const std::string& tok : split(value, ',')) {
        const auto parts = split(tok, '-');
        if (parts.size() != 2)
          throw ConfigError("condition token must look like 'low-high': '" + tok + "'");
        cfg.gen.conditions.push_back({parse_setting(parts[0]), parse_setting(parts[1])});
      }
    }
  } else if (key == "jitter") {
    cfg.gen.jitter = parse_double(value, key);
  } else if (key == "gap_jitter") {
    cfg.gen.gap_jitter = parse_double(value, key);
  } else if (key == "noise_std") {
    cfg.gen.noise_std = parse_double(value, key);
  } else if (key == "folds") {
    cfg.folds = as_int(value);
  } else if (key == "states") {
    cfg.n_states.clear();
    for (const std::string& tok : split(value, ',')) cfg.n_states.push_back(as_int(tok));
  } else if (key == "pooling") {
    cfg.pooling.clear();
    for (const std::string& tok : split(value, ',')) cfg.pooling.push_back(parse_pooling_token(tok));
  } else if (key == "feature_set") {
    cfg.feature_set = parse_feature_set(value);
  } else if (key == "seed") {
    cfg.seed = std::stoull(value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "jobs") {
    cfg.jobs = as_int(value);
  } else if (key == "window") {
    cfg.window_s = parse_double(value, key);
  } else if (key == "max_iterations") {
    cfg.train.max_iterations = as_int(value);
  } else if (key == "tolerance") {
    cfg.train.tolerance = parse_double(value, key);
  } else if (key == "variance_floor") {
    cfg.train.variance_floor = parse_double(value, key);
  } else if (key == "full_covariance") {
    if (value == "true")
      cfg.train.full_covariance = true;
    else if (value == "false")
      cfg.train.full_covariance = false;
    else
      throw ConfigError("full_covariance must be true or false");
  } else if (key == "terminal") {
    if (value == "true")
      cfg.train.terminal = true;
    else if (value == "false")
      cfg.train.terminal = false;
    else
      throw ConfigError("terminal must be true or false");
  } else if (key == "pca_q") {
    cfg.pca_q = as_int(value);
  } else if (key == "knn_k") {
    cfg.knn_k = as_int(value);
  } else {
    throw ConfigError("unknown config key: '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const std::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

// --- classifier wiring ---

std::vector<PreparedTrial> prepare_trials(const Dataset& ds, int pool_factor, double window_s) {
  std::vector<PreparedTrial> out;
  out.reserve(ds.entries.size());
  for (const DatasetEntry& e : ds.entries) {
    PreparedTrial p;
    const TaxelTrial pooled = pool_trial(e.trial, pool_factor);
    p.feats = extract_features(pooled, window_s);
    p.feats.label = e.label;
    p.label = e.label;
    p.cond = e.condition;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::vector<double> baseline_vector(const FeatureSeries& fs, const std::vector<Channel>& chans,
                                    bool scaled, int expected_len) {
  if (!scaled) return vectorize(fs, chans, expected_len);
  FeatureSeries tmp = fs;
  for (Channel ch : chans) {
    std::vector<double>& series = ch == Channel::FMax   ? tmp.f_max
                                  : ch == Channel::Area ? tmp.area
                                                        : tmp.d;
    series = scale_features(series).values;
  }
  return vectorize(tmp, chans, expected_len);
}

}  // namespace

TrainedClassifier train_classifier(const ClassifierConfig& cfg,
                                   const std::vector<const PreparedTrial*>& training) {
  if (training.empty()) throw InsufficientData("train_classifier: empty training set");
  TrainedClassifier model;
  model.cfg = cfg;
  switch (cfg.kind) {
    case ClassifierKind::HmmForce:
    case ClassifierKind::HmmArea:
    case ClassifierKind::HmmMultivariate: {
      model.set = cfg.kind == ClassifierKind::HmmForce  ? FeatureSet::Force
                  : cfg.kind == ClassifierKind::HmmArea ? FeatureSet::Area
                                                        : FeatureSet::ForceMotion;
      std::vector<FeatureSeries> feats;
      feats.reserve(training.size());
      for (const PreparedTrial* t : training) feats.push_back(t->feats);
      model.bank = train_bank(feats, model.set, cfg.train);
      break;
    }
    case ClassifierKind::BaselineSingle:
    case ClassifierKind::BaselineTwoArea:
    case ClassifierKind::BaselineTwoMotion: {
      model.channels = cfg.kind == ClassifierKind::BaselineSingle
                           ? std::vector<Channel>{Channel::FMax}
                       : cfg.kind == ClassifierKind::BaselineTwoArea
                           ? std::vector<Channel>{Channel::FMax, Channel::Area}
                           : std::vector<Channel>{Channel::FMax, Channel::Motion};
      model.scale_channels = cfg.kind == ClassifierKind::BaselineTwoMotion;
      model.vec_len = int(training.front()->feats.length());
      std::vector<std::vector<double>> vectors;
      vectors.reserve(training.size());
      for (const PreparedTrial* t : training)
        vectors.push_back(baseline_vector(t->feats, model.channels, model.scale_channels,
                                          model.vec_len));
      model.pca = pca_fit(vectors, cfg.pca_q);
      model.points.reserve(training.size());
      for (size_t i = 0; i < training.size(); ++i)
        model.points.push_back({pca_project(model.pca, vectors[i]), training[i]->label});
      break;
    }
  }
  return model;
}

Category predict(const TrainedClassifier& model, const PreparedTrial& trial) {
  switch (model.cfg.kind) {
    case ClassifierKind::HmmForce:
    case ClassifierKind::HmmArea:
    case ClassifierKind::HmmMultivariate:
      return classify(model.bank, trial.feats, model.set).category;
    default: {
      const auto vec =
          baseline_vector(trial.feats, model.channels, model.scale_channels, model.vec_len);
      return knn_classify(model.points, pca_project(model.pca, vec), model.cfg.knn_k);
    }
  }
}

std::vector<int> stratified_folds(const std::vector<PreparedTrial>& trials, int folds,
                                  uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_folds: folds must be >= 2");
  std::vector<int> assign(trials.size(), -1);
  for (int c = 0; c < kNumCategories; ++c) {
    std::vector<size_t> idxs;
    for (size_t i = 0; i < trials.size(); ++i)
      if (int(trials[i].label) == c) idxs.push_back(i);
    Rng rng(mix_seed(seed, 0xF01D, uint64_t(c)));
    rng.shuffle(idxs);
    for (size_t i = 0; i < idxs.size(); ++i) assign[idxs[i]] = int(i % size_t(folds));
  }
  return assign;
}

namespace {

std::vector<ConfusionMatrix> cv_folds(const std::vector<PreparedTrial>& trials,
                                      const ClassifierConfig& classifier, int folds,
                                      uint64_t seed, int jobs) {
  int counts[kNumCategories] = {};
  for (const PreparedTrial& t : trials) counts[int(t.label)] += 1;
  for (int c = 0; c < kNumCategories; ++c)
    if (counts[c] < folds)
      throw InsufficientData(std::string("cross_validate: category ") + to_string(Category(c)) +
                             " has " + std::to_string(counts[c]) + " trials, need >= " +
                             std::to_string(folds));

  const std::vector<int> fold_of = stratified_folds(trials, folds, seed);
  std::vector<ConfusionMatrix> result(folds);
  parallel_for(folds, jobs, [&](int f) {
    std::vector<const PreparedTrial*> train_set;
    std::vector<const PreparedTrial*> test_set;
    for (size_t i = 0; i < trials.size(); ++i)
      (fold_of[i] == f ? test_set : train_set).push_back(&trials[i]);
    const TrainedClassifier model = train_classifier(classifier, train_set);
    ConfusionMatrix cm;
    for (const PreparedTrial* t : test_set) cm.add(t->label, predict(model, *t));
    result[f] = cm;
  });
  return result;
}

}  // namespace

ConfusionMatrix cross_validate(const std::vector<PreparedTrial>& trials,
                               const ClassifierConfig& classifier, int folds, uint64_t seed,
                               int jobs) {
  ConfusionMatrix total;
  for (const ConfusionMatrix& cm : cv_folds(trials, classifier, folds, seed, jobs)) total += cm;
  return total;
}

// --- experiment drivers ---

namespace {

ClassifierConfig make_classifier(const ExperimentConfig& cfg, ClassifierKind kind, int n_states) {
  ClassifierConfig cc;
  cc.kind = kind;
  cc.train = cfg.train;
  cc.train.n_states = n_states;
  cc.pca_q = cfg.pca_q;
  cc.knn_k = cfg.knn_k;
  return cc;
}

void run_fold_cells(const ExperimentConfig& cfg, const std::vector<PreparedTrial>& prepared,
                    ClassifierKind kind, ExperimentReport& report, bool headline) {
  const ClassifierConfig cc = make_classifier(cfg, kind, cfg.n_states.front());
  const auto folds = cv_folds(prepared, cc, cfg.folds, mix_seed(cfg.seed, 0xCF), cfg.jobs);
  ConfusionMatrix total;
  for (int f = 0; f < int(folds.size()); ++f) {
    CellResult cell;
    cell.name = "fold-" + std::to_string(f) + "/" + to_string(kind);
    cell.classifier = to_string(kind);
    cell.parameter = "fold";
    cell.value = std::to_string(f);
    cell.confusion = folds[f];
    report.cells.push_back(std::move(cell));
    total += folds[f];
  }
  CellResult all;
  all.name = std::string("all/") + to_string(kind);
  all.classifier = to_string(kind);
  all.parameter = "fold";
  all.value = "all";
  all.confusion = total;
  report.cells.push_back(std::move(all));
  if (headline) report.headline = total;
}

void run_resolution_sweep(const ExperimentConfig& cfg, const Dataset& ds,
                          ExperimentReport& report) {
  bool first = true;
  for (size_t pi = 0; pi < cfg.pooling.size(); ++pi) {
    const int factor = cfg.pooling[pi];
    const auto prepared = prepare_trials(ds, factor, cfg.window_s);
    for (ClassifierKind kind : {ClassifierKind::HmmForce, ClassifierKind::HmmArea}) {
      const ClassifierConfig cc = make_classifier(cfg, kind, cfg.n_states.front());
      const ConfusionMatrix cm = cross_validate(prepared, cc, cfg.folds,
                                                mix_seed(cfg.seed, 0xCF, uint64_t(factor)),
                                                cfg.jobs);
      CellResult cell;
      cell.name = "pool-" + pooling_token(factor) + "/" + to_string(kind);
      cell.classifier = to_string(kind);
      cell.parameter = "resolution";
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", resolution_taxels_per_cm2(factor));
      cell.value = buf;
      cell.confusion = cm;
      report.cells.push_back(std::move(cell));
      if (first) {
        report.headline = cm;
        first = false;
      }
    }
  }
}

void run_state_sweep(const ExperimentConfig& cfg, const Dataset& ds, ExperimentReport& report) {
  const auto prepared = prepare_trials(ds, cfg.pooling.front(), cfg.window_s);
  bool first = true;
  const ClassifierKind kind = classifier_for(cfg.feature_set);
  for (size_t si = 0; si < cfg.n_states.size(); ++si) {
    const ClassifierConfig cc = make_classifier(cfg, kind, cfg.n_states[si]);
    const ConfusionMatrix cm = cross_validate(
        prepared, cc, cfg.folds, mix_seed(cfg.seed, 0xCF, uint64_t(cfg.n_states[si])),
        cfg.jobs);
    CellResult cell;
    cell.name = "states-" + std::to_string(cfg.n_states[si]);
    cell.classifier = to_string(kind);
    cell.parameter = "states";
    cell.value = std::to_string(cfg.n_states[si]);
    cell.confusion = cm;
    report.cells.push_back(std::move(cell));
    if (first) {
      report.headline = cm;
      first = false;
    }
  }
}

void run_generalization(const ExperimentConfig& cfg, const Dataset& ds,
                        ExperimentReport& report) {
  const auto prepared = prepare_trials(ds, cfg.pooling.front(), cfg.window_s);
  std::vector<Condition> conds;
  for (const PreparedTrial& t : prepared)
    if (std::find(conds.begin(), conds.end(), t.cond) == conds.end()) conds.push_back(t.cond);
  std::sort(conds.begin(), conds.end(), [](const Condition& a, const Condition& b) {
    return std::pair(int(a.velocity), int(a.stiffness)) <
           std::pair(int(b.velocity), int(b.stiffness));
  });
  if (conds.size() < 2)
    throw InsufficientData("generalization: dataset must span at least two conditions");

  const std::vector<ClassifierKind> kinds = {
      ClassifierKind::BaselineSingle, ClassifierKind::BaselineTwoMotion,
      ClassifierKind::HmmForce, ClassifierKind::HmmMultivariate};
  const int n_cells = int(conds.size() * kinds.size());
  std::vector<ConfusionMatrix> cms(n_cells);
  parallel_for(n_cells, cfg.jobs, [&](int idx) {
    const Condition& holdout = conds[idx / kinds.size()];
    const ClassifierKind kind = kinds[idx % kinds.size()];
    std::vector<const PreparedTrial*> train_set;
    std::vector<const PreparedTrial*> test_set;
    for (const PreparedTrial& t : prepared)
      (t.cond == holdout ? test_set : train_set).push_back(&t);
    const TrainedClassifier model =
        train_classifier(make_classifier(cfg, kind, cfg.n_states.front()), train_set);
    ConfusionMatrix cm;
    for (const PreparedTrial* t : test_set) cm.add(t->label, predict(model, *t));
    cms[idx] = cm;
  });

  std::vector<ConfusionMatrix> totals(kinds.size());
  for (int idx = 0; idx < n_cells; ++idx) {
    const Condition& holdout = conds[idx / kinds.size()];
    const ClassifierKind kind = kinds[idx % kinds.size()];
    CellResult cell;
    cell.name = "holdout-" + condition_token(holdout) + "/" + to_string(kind);
    cell.classifier = to_string(kind);
    cell.parameter = "holdout";
    cell.value = condition_token(holdout);
    cell.confusion = cms[idx];
    report.cells.push_back(std::move(cell));
    totals[idx % kinds.size()] += cms[idx];
  }
  for (size_t k = 0; k < kinds.size(); ++k) {
    CellResult cell;
    cell.name = std::string("all/") + to_string(kinds[k]);
    cell.classifier = to_string(kinds[k]);
    cell.parameter = "holdout";
    cell.value = "all";
    cell.confusion = totals[k];
    report.cells.push_back(std::move(cell));
    if (kinds[k] == ClassifierKind::HmmMultivariate) report.headline = totals[k];
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Dataset ds;
  if (!cfg.dataset_path.empty()) {
    ds = load_dataset(cfg.dataset_path);
  } else {
    GenerationSpec gen = cfg.gen;
    gen.seed = cfg.seed;
    gen.out_dir.clear();
    ds = generate_dataset(gen);
  }

  ExperimentReport report;
  report.kind = to_string(cfg.kind);
  report.seed = cfg.seed;

  switch (cfg.kind) {
    case ExperimentKind::Cv4: {
      const auto prepared = prepare_trials(ds, cfg.pooling.front(), cfg.window_s);
      run_fold_cells(cfg, prepared, classifier_for(cfg.feature_set), report, true);
      break;
    }
    case ExperimentKind::MultivariateCv: {
      const auto prepared = prepare_trials(ds, cfg.pooling.front(), cfg.window_s);
      run_fold_cells(cfg, prepared, ClassifierKind::HmmMultivariate, report, true);
      break;
    }
    case ExperimentKind::BaselineCv: {
      const auto prepared = prepare_trials(ds, cfg.pooling.front(), cfg.window_s);
      run_fold_cells(cfg, prepared, ClassifierKind::BaselineSingle, report, false);
      run_fold_cells(cfg, prepared, ClassifierKind::BaselineTwoArea, report, true);
      break;
    }
    case ExperimentKind::ResolutionSweep:
      run_resolution_sweep(cfg, ds, report);
      break;
    case ExperimentKind::StateSweep:
      run_state_sweep(cfg, ds, report);
      break;
    case ExperimentKind::Generalization:
      run_generalization(cfg, ds, report);
      break;
  }

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_report_files(const ExperimentReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  {
    std::ofstream out(path("confusion.csv"));
    if (!out) throw FormatError("cannot open for write: " + path("confusion.csv"));
    out << "truth,RF,RM,SF,SM\n";
    for (int c = 0; c < kNumCategories; ++c) {
      out << to_string(Category(c));
      for (int p = 0; p < kNumCategories; ++p) out << ',' << report.headline.counts[c][p];
      out << '\n';
    }
  }

  {
    std::ofstream out(path("summary.csv"));
    if (!out) throw FormatError("cannot open for write: " + path("summary.csv"));
    out << "cell,classifier,parameter,value,trials,correct,accuracy,acc_RF,acc_RM,acc_SF,acc_SM\n";
    for (const CellResult& cell : report.cells) {
      const auto per_class = cell.confusion.per_class_accuracy();
      out << cell.name << ',' << cell.classifier << ',' << cell.parameter << ',' << cell.value
          << ',' << cell.confusion.total() << ',' << cell.confusion.correct() << ','
          << format_percent(cell.confusion.accuracy());
      for (double v : per_class) out << ',' << format_percent(v);
      out << '\n';
    }
  }

  {
    nlohmann::ordered_json j;
    j["kind"] = report.kind;
    j["seed"] = report.seed;
    j["cells"] = nlohmann::ordered_json::array();
    for (const CellResult& cell : report.cells) {
      nlohmann::ordered_json c;
      c["name"] = cell.name;
      c["classifier"] = cell.classifier;
      c["parameter"] = cell.parameter;
      c["value"] = cell.value;
      c["trials"] = cell.confusion.total();
      c["correct"] = cell.confusion.correct();
      c["accuracy"] = cell.confusion.accuracy();
      c["per_class_accuracy"] = cell.confusion.per_class_accuracy();
      c["confusion"] = cell.confusion.counts;
      j["cells"].push_back(std::move(c));
    }
    j["headline"]["trials"] = report.headline.total();
    j["headline"]["correct"] = report.headline.correct();
    j["headline"]["accuracy"] = report.headline.accuracy();
    j["headline"]["confusion"] = report.headline.counts;
    std::ofstream out(path("report.json"));
    if (!out) throw FormatError("cannot open for write: " + path("report.json"));
    out << j.dump(2) << '\n';
  }
}

int run(const ExperimentConfig& cfg) {
  try {
    const ExperimentReport report = run_experiment(cfg);
    write_report_files(report, cfg.out_dir);
    for (const CellResult& cell : report.cells)
      std::cout << cell.name << "  accuracy " << format_percent(cell.confusion.accuracy())
                << "%  (" << cell.confusion.correct() << "/" << cell.confusion.total() << ")\n";
    std::cout << "headline accuracy " << format_percent(report.headline.accuracy()) << "%\n";
    std::cout << "wrote " << cfg.out_dir << "/{confusion.csv,summary.csv,report.json} in "
              << format_percent(report.wall_time_s) << " s\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tactile
