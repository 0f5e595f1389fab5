#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactile/taxel.hpp"

namespace tactile {

struct NoContact : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-timestep (F_max, a, d) over the post-onset window. All four series have
// equal length; d[0] == 0.
struct FeatureSeries {
  std::vector<double> t;      // s, relative to onset
  std::vector<double> f_max;  // N
  std::vector<double> area;   // taxel counts (stored as doubles)
  std::vector<double> d;      // m, centroid travel since onset
  int onset_index = 0;
  std::optional<Category> label;

  size_t length() const { return t.size(); }
};

struct ScaledSeries {
  std::vector<double> values;
  double mean_used = 0.0;
  double std_used = 1.0;
};

// First frame whose maximum taxel force strictly exceeds the trial threshold.
int detect_onset(const TaxelTrial& trial);

// Threshold -> components -> largest region per frame over [onset, onset+window).
// Frames with no component carry f_max=0, area=0 and the previous d. Trials
// shorter than the window are padded with the per-channel mean of the observed
// values. arm_position overrides the trial's own series when given.
FeatureSeries extract_features(const TaxelTrial& trial, double window_s = 1.2,
                               const std::vector<double>* arm_position = nullptr,
                               Connectivity conn = Connectivity::Four);

// (f - mean(f)) / std(f) with the population standard deviation.
ScaledSeries scale_features(const std::vector<double>& values);

// Linear resampling onto target_len uniformly spaced points; endpoints exact.
std::vector<double> time_normalize(const std::vector<double>& series, int target_len);

// Cache format: header "length,label" then four comma-separated lines
// (t, f_max, area, d).
void write_features(const FeatureSeries& fs, const std::string& path);
FeatureSeries read_features(const std::string& path);

}  // namespace tactile
