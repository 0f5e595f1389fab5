#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tactile/features.hpp"
#include "tactile/taxel.hpp"

namespace tactile {

struct TooShortSequence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Observation sequence, T frames of `dim` values each, row-major.
struct ObsSequence {
  int dim = 1;
  std::vector<double> values;

  int length() const { return dim == 0 ? 0 : int(values.size()) / dim; }
  const double* frame(int t) const { return values.data() + size_t(t) * dim; }
  void push(double x) { values.push_back(x); }
  void push(double x, double y) {
    values.push_back(x);
    values.push_back(y);
  }
};

// Per-state Gaussian emission, dim 1 or 2, row-major covariance.
struct GaussianState {
  std::vector<double> mean;
  std::vector<double> cov;
};

struct GaussianHmm {
  int n_states = 0;
  int dim = 1;
  bool left_right = true;
  // Classic speech-toolkit scoring: paths must end in the last state. Off by
  // default; forward/Viterbi then accept any end state.
  bool terminal = false;
  std::vector<double> initial;      // N
  std::vector<double> transitions;  // N*N row-major
  std::vector<GaussianState> states;

  double a(int i, int j) const { return transitions[size_t(i) * n_states + j]; }
  double& a(int i, int j) { return transitions[size_t(i) * n_states + j]; }
  void validate() const;
};

struct TrainConfig {
  int n_states = 10;
  int max_iterations = 200;
  double tolerance = 1e-4;      // log-likelihood per observation
  double variance_floor = 1e-6;
  bool full_covariance = true;
  bool terminal = false;  // train/score with mandatory final-state termination
  uint64_t seed = 0;

  void validate() const;
};

// Segmentation-based initialization: sequences are time-normalized to a
// common length and split into n_states contiguous parts; state j's Gaussian
// is fit over part j pooled across sequences. a_jj = a_j,j+1 = 0.5, last
// state absorbing, pi = e_1.
GaussianHmm init_left_right(const std::vector<ObsSequence>& training, const TrainConfig& cfg);

struct TrainResult {
  GaussianHmm model;
  std::vector<double> loglik_trace;  // total training log-likelihood per kept iteration
  int iterations = 0;                // applied re-estimation steps
  bool converged = false;
  double last_improvement = 0.0;     // per-observation gain of the final candidate
};

// Scaled forward-backward EM. The trace is non-decreasing by construction:
// an update is kept only while it improves the total log-likelihood by at
// least `tolerance` per observation.
TrainResult baum_welch(const GaussianHmm& model, const std::vector<ObsSequence>& training,
                       const TrainConfig& cfg);

struct ViterbiResult {
  std::vector<int> path;  // 0-based state indices
  double log_prob = 0.0;  // joint log p(path, sequence | model)
};

ViterbiResult viterbi(const GaussianHmm& model, const ObsSequence& seq);

// log p(sequence | model) via log-space forward recursion.
double forward_loglik(const GaussianHmm& model, const ObsSequence& seq);

// --- classifier banks ---

enum class FeatureSet { Force, Area, ForceMotion };
const char* to_string(FeatureSet fs);
FeatureSet parse_feature_set(const std::string& token);

// Observation sequence for one trial: raw f_max or area for the univariate
// sets, per-trial scaled (S_Fmax, S_d) pairs for ForceMotion.
ObsSequence observation_sequence(const FeatureSeries& fs, FeatureSet set);

struct HmmBank {
  std::map<std::pair<Category, FeatureSet>, GaussianHmm> models;

  bool complete(FeatureSet set) const;
};

// One model per category for the given feature set (call per set to assemble
// the paper-style 8-model univariate bank).
HmmBank train_bank(const std::vector<FeatureSeries>& training, FeatureSet set,
                   const TrainConfig& cfg);

struct Classification {
  Category category;
  std::array<double, kNumCategories> scores;  // Viterbi log-probabilities
};

// Viterbi score against each category model; argmax with ties broken by the
// fixed order RF < RM < SF < SM.
Classification classify(const HmmBank& bank, const FeatureSeries& features, FeatureSet set);

// Text format: "n_states,dim,topology", pi line, N transition rows, N emission
// lines (means then row-major covariance), 17 significant digits.
void write_model(const GaussianHmm& model, const std::string& path);
GaussianHmm read_model(const std::string& path);

}  // namespace tactile
