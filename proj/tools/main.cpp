// Command-line front end: generate synthetic datasets, extract feature
// caches, train/apply model banks, and run the experiment suites.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tactile/baseline.hpp"
#include "tactile/contact_sim.hpp"
#include "tactile/features.hpp"
#include "tactile/harness.hpp"
#include "tactile/hmm.hpp"
#include "tactile/taxel.hpp"
#include "tactile/util.hpp"

namespace {

using namespace tactile;

int cmd_generate(const std::string& out, uint64_t seed, int trials,
                 const std::string& conditions, double jitter, double noise_std) {
  GenerationSpec spec;
  spec.trials_per_cell = trials;
  spec.seed = seed;
  spec.jitter = jitter;
  spec.noise_std = noise_std;
  spec.out_dir = out;
  if (conditions == "matrix")
    spec.conditions = {{Setting::Low, Setting::Low},
                       {Setting::Low, Setting::High},
                       {Setting::High, Setting::Low},
                       {Setting::High, Setting::High}};
  else if (conditions != "stereotyped")
    throw ConfigError("--conditions must be stereotyped or matrix");
  const Dataset ds = generate_dataset(spec);
  std::cout << "wrote " << ds.entries.size() << " trials + manifest.csv to " << out << "\n";
  return 0;
}

int cmd_extract(const std::string& manifest, const std::string& out, double window) {
  const Dataset ds = load_dataset(manifest);
  std::filesystem::create_directories(out);
  for (const DatasetEntry& e : ds.entries) {
    FeatureSeries fs = extract_features(e.trial, window);
    fs.label = e.label;
    const auto name = std::filesystem::path(e.file).filename().string() + ".feat";
    write_features(fs, (std::filesystem::path(out) / name).string());
  }
  std::cout << "wrote " << ds.entries.size() << " feature files to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& manifest, const std::string& fs_token, int states,
              const std::string& out, double window) {
  const Dataset ds = load_dataset(manifest);
  const auto prepared = prepare_trials(ds, 1, window);
  std::vector<FeatureSeries> feats;
  for (const auto& p : prepared) feats.push_back(p.feats);
  TrainConfig cfg;
  cfg.n_states = states;
  std::filesystem::create_directories(out);
  for (const std::string& token : split(fs_token, ',')) {
    const FeatureSet set = parse_feature_set(token);
    const HmmBank bank = train_bank(feats, set, cfg);
    for (const auto& [key, model] : bank.models) {
      const std::string name =
          std::string(to_string(key.first)) + "_" + to_string(key.second) + ".hmm";
      write_model(model, (std::filesystem::path(out) / name).string());
    }
  }
  std::cout << "wrote models to " << out << "\n";
  return 0;
}

int cmd_classify(const std::string& models_dir, const std::string& trial_path,
                 const std::string& fs_token, double window) {
  const FeatureSet set = parse_feature_set(fs_token);
  HmmBank bank;
  for (int c = 0; c < kNumCategories; ++c) {
    const std::string name =
        std::string(to_string(Category(c))) + "_" + to_string(set) + ".hmm";
    bank.models[{Category(c), set}] =
        read_model((std::filesystem::path(models_dir) / name).string());
  }
  const TaxelTrial trial = read_trial(trial_path);
  const FeatureSeries fs = extract_features(trial, window);
  const Classification res = classify(bank, fs, set);
  std::cout << to_string(res.category) << "\n";
  for (int c = 0; c < kNumCategories; ++c)
    std::cout << "  " << to_string(Category(c)) << " log-prob " << res.scores[c] << "\n";
  return 0;
}

int cmd_report(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw ConfigError("cannot open report: " + report_path);
  nlohmann::json j;
  in >> j;
  std::cout << "experiment: " << j["kind"].get<std::string>() << "  seed "
            << j["seed"].get<uint64_t>() << "\n\n";
  std::printf("%-40s %10s %8s\n", "cell", "trials", "acc %");
  for (const auto& cell : j["cells"]) {
    std::printf("%-40s %10d %8.2f\n", cell["name"].get<std::string>().c_str(),
                cell["trials"].get<int>(), cell["accuracy"].get<double>());
  }
  std::printf("\nheadline accuracy %.2f%%  confusion (rows=truth):\n",
              j["headline"]["accuracy"].get<double>());
  std::printf("%4s %6s %6s %6s %6s\n", "", "RF", "RM", "SF", "SM");
  const char* names[] = {"RF", "RM", "SF", "SM"};
  const auto& cm = j["headline"]["confusion"];
  for (int r = 0; r < kNumCategories; ++r)
    std::printf("%4s %6d %6d %6d %6d\n", names[r], cm[r][0].get<int>(), cm[r][1].get<int>(),
                cm[r][2].get<int>(), cm[r][3].get<int>());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tactile: incidental-contact object property classification toolkit"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "generate a synthetic labeled dataset");
  std::string gen_out = "data";
  uint64_t gen_seed = 0;
  int gen_trials = 20;
  std::string gen_conditions = "stereotyped";
  double gen_jitter = 0.2, gen_noise = 0.005;
  generate->add_option("--out", gen_out, "output directory");
  generate->add_option("--seed", gen_seed, "master seed");
  generate->add_option("--trials", gen_trials, "trials per (category x condition) cell");
  generate->add_option("--conditions", gen_conditions, "stereotyped | matrix");
  generate->add_option("--jitter", gen_jitter, "relative parameter jitter");
  generate->add_option("--noise-std", gen_noise, "taxel noise sigma (N)");

  // extract
  auto* extract = app.add_subcommand("extract", "extract and cache feature series");
  std::string ext_manifest, ext_out = "features";
  double ext_window = 1.2;
  extract->add_option("--dataset", ext_manifest, "manifest.csv path")->required();
  extract->add_option("--out", ext_out, "output directory");
  extract->add_option("--window", ext_window, "post-onset window (s)");

  // train
  auto* train = app.add_subcommand("train", "train a category HMM bank");
  std::string tr_manifest, tr_fs = "force", tr_out = "models";
  int tr_states = 10;
  double tr_window = 1.2;
  train->add_option("--dataset", tr_manifest, "manifest.csv path")->required();
  train->add_option("--feature-set", tr_fs, "force | area | force_motion (comma list ok)");
  train->add_option("--states", tr_states, "hidden states");
  train->add_option("--out", tr_out, "model output directory");
  train->add_option("--window", tr_window, "post-onset window (s)");

  // classify
  auto* cls = app.add_subcommand("classify", "classify one trial file");
  std::string cl_models = "models", cl_trial, cl_fs = "force";
  double cl_window = 1.2;
  cls->add_option("--models", cl_models, "model directory");
  cls->add_option("--trial", cl_trial, "trial file")->required();
  cls->add_option("--feature-set", cl_fs, "force | area | force_motion");
  cls->add_option("--window", cl_window, "post-onset window (s)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run an experiment config");
  std::string ex_config;
  std::vector<std::string> ex_overrides;
  exp->add_option("--config", ex_config, "key=value config file")->required();
  uint64_t ex_seed = 0;
  std::string ex_out;
  int ex_jobs = 0;
  exp->add_option("--seed", ex_seed, "override config seed");
  exp->add_option("--out", ex_out, "override output directory");
  exp->add_option("--jobs", ex_jobs, "parallel worker count");
  exp->add_option("--set", ex_overrides, "extra key=value overrides");

  // report
  auto* rep = app.add_subcommand("report", "pretty-print a report.json");
  std::string rp_path;
  rep->add_option("--report", rp_path, "report.json path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed())
      return cmd_generate(gen_out, gen_seed, gen_trials, gen_conditions, gen_jitter, gen_noise);
    if (extract->parsed()) return cmd_extract(ext_manifest, ext_out, ext_window);
    if (train->parsed()) return cmd_train(tr_manifest, tr_fs, tr_states, tr_out, tr_window);
    if (cls->parsed()) return cmd_classify(cl_models, cl_trial, cl_fs, cl_window);
    if (exp->parsed()) {
      ExperimentConfig cfg = parse_config_file(ex_config);
      if (exp->count("--seed")) cfg.seed = ex_seed;
      if (exp->count("--out")) cfg.out_dir = ex_out;
      if (exp->count("--jobs")) cfg.jobs = ex_jobs;
      for (const std::string& kv : ex_overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + kv);
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      return tactile::run(cfg);
    }
    if (rep->parsed()) return cmd_report(rp_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
