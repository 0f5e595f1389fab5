#include "tactile/features.hpp"

#include <cmath>
#include <fstream>

#include "tactile/util.hpp"

namespace tactile {

int detect_onset(const TaxelTrial& trial) {
  for (size_t i = 0; i < trial.frames.size(); ++i)
    if (trial.frames[i].max_force() > trial.contact_threshold) return int(i);
  throw NoContact("no frame exceeds the contact threshold of " +
                  format_double(trial.contact_threshold) + " N");
}

FeatureSeries extract_features(const TaxelTrial& trial, double window_s,
                               const std::vector<double>* arm_position,
                               Connectivity conn) {
  const int onset = detect_onset(trial);
  const int window_len = int(std::lround(window_s * trial.sample_rate));
  if (window_len < 1) throw std::invalid_argument("extract_features: window too short");

  const std::vector<double>& arm = arm_position ? *arm_position : trial.arm_position;
  auto arm_at = [&](size_t frame) { return frame < arm.size() ? arm[frame] : 0.0; };

  FeatureSeries fs;
  fs.onset_index = onset;
  fs.label = trial.label;

  // world centroid of the largest component: arm translation along the column
  // axis plus the grid position scaled by the taxel pitch
  double p0_row = 0.0, p0_col = 0.0;
  bool have_origin = false;
  double prev_d = 0.0;

  const size_t available = trial.frames.size() - size_t(onset);
  const size_t observed = std::min(size_t(window_len), available);
  for (size_t k = 0; k < observed; ++k) {
    const size_t idx = size_t(onset) + k;
    const TaxelFrame& frame = trial.frames[idx];
    const BinaryMask mask = threshold_frame(frame, trial.contact_threshold);
    const auto comps = connected_components(mask, conn);
    const auto largest = largest_component(comps);

    fs.t.push_back(double(k) / trial.sample_rate);
    if (!largest) {
      fs.f_max.push_back(0.0);
      fs.area.push_back(0.0);
      fs.d.push_back(prev_d);
      continue;
    }
    double fmax = 0.0;
    for (auto& [r, c] : largest->taxels) fmax = std::max(fmax, frame.at(r, c));
    const double wr = largest->centroid_row * frame.taxel_pitch;
    const double wc = largest->centroid_col * frame.taxel_pitch + arm_at(idx);
    if (!have_origin) {
      p0_row = wr;
      p0_col = wc;
      have_origin = true;
    }
    const double d = std::hypot(wr - p0_row, wc - p0_col);
    fs.f_max.push_back(fmax);
    fs.area.push_back(double(largest->area));
    fs.d.push_back(d);
    prev_d = d;
  }

  // short trials: extrapolate with the per-channel mean of this trial
  if (observed < size_t(window_len)) {
    const double mf = mean_of(fs.f_max);
    const double ma = mean_of(fs.area);
    const double md = mean_of(fs.d);
    for (size_t k = observed; k < size_t(window_len); ++k) {
      fs.t.push_back(double(k) / trial.sample_rate);
      fs.f_max.push_back(mf);
      fs.area.push_back(ma);
      fs.d.push_back(md);
    }
  }
  return fs;
}

ScaledSeries scale_features(const std::vector<double>& values) {
  if (values.size() < 2)
    throw std::invalid_argument("scale_features: need at least 2 samples");
  const double mean = mean_of(values);
  const double sd = std::sqrt(population_variance(values, mean));
  if (sd == 0.0)
    throw DegenerateSeries("scale_features: constant series has zero standard deviation");
  ScaledSeries out;
  out.mean_used = mean;
  out.std_used = sd;
  out.values.reserve(values.size());
  for (double v : values) out.values.push_back((v - mean) / sd);
  return out;
}

std::vector<double> time_normalize(const std::vector<double>& series, int target_len) {
  if (series.size() < 2)
    throw std::invalid_argument("time_normalize: need at least 2 samples");
  if (target_len < 2) throw std::invalid_argument("time_normalize: target_len must be >= 2");
  const size_t n = series.size();
  std::vector<double> out(target_len);
  for (int i = 0; i < target_len; ++i) {
    const double x = double(i) * double(n - 1) / double(target_len - 1);
    const size_t lo = size_t(std::floor(x));
    if (lo + 1 >= n) {
      out[i] = series[n - 1];
      continue;
    }
    const double frac = x - double(lo);
    out[i] = series[lo] * (1.0 - frac) + series[lo + 1] * frac;
  }
  out.front() = series.front();
  out.back() = series.back();
  return out;
}

void write_features(const FeatureSeries& fs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for write: " + path);
  out << fs.length() << ',' << (fs.label ? to_string(*fs.label) : "unknown") << '\n';
  const std::vector<double>* chans[] = {&fs.t, &fs.f_max, &fs.area, &fs.d};
  for (const auto* ch : chans) {
    for (size_t i = 0; i < ch->size(); ++i) {
      if (i) out << ',';
      out << format_double((*ch)[i]);
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
}

FeatureSeries read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open feature file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty feature file: " + path);
  const auto head = split(trim(line), ',');
  if (head.size() != 2) throw FormatError("feature header needs 2 fields in " + path);
  const size_t length = size_t(parse_double(head[0], "length"));
  FeatureSeries fs;
  fs.label = parse_label(head[1]);
  std::vector<double>* chans[] = {&fs.t, &fs.f_max, &fs.area, &fs.d};
  for (auto* ch : chans) {
    if (!std::getline(in, line)) throw FormatError("truncated feature file: " + path);
    for (const std::string& cell : split(trim(line), ','))
      ch->push_back(parse_double(cell, "feature value"));
    if (ch->size() != length) throw FormatError("feature line length mismatch in " + path);
  }
  return fs;
}

}  // namespace tactile
