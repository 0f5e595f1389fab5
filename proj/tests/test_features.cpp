#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "tactile/features.hpp"
#include "tactile/util.hpp"

using namespace tactile;

namespace {

// trial with one taxel pressed to `force` in every frame
TaxelTrial constant_trial(int n_frames, double force, double tau = 0.5) {
  TaxelTrial trial;
  trial.contact_threshold = tau;
  for (int k = 0; k < n_frames; ++k) {
    TaxelFrame f = TaxelFrame::zeros(24, 16);
    f.at(10, 8) = force;
    trial.frames.push_back(std::move(f));
  }
  return trial;
}

}  // namespace

TEST_CASE("onset detection is the first strict exceedance") {
  TaxelTrial trial = constant_trial(4, 0.0);
  trial.frames[2].at(5, 5) = 0.6;
  trial.frames[3].at(5, 5) = 1.0;
  CHECK(detect_onset(trial) == 2);

  CHECK(detect_onset(constant_trial(3, 1.0)) == 0);
  CHECK_THROWS_AS(detect_onset(constant_trial(3, 0.0)), NoContact);
  CHECK_THROWS_AS(detect_onset(constant_trial(3, 0.5)), NoContact);  // equality is not contact
}

TEST_CASE("static contact yields constant features and zero displacement") {
  const TaxelTrial trial = constant_trial(120, 1.0);
  const FeatureSeries fs = extract_features(trial, 1.2);
  REQUIRE(fs.length() == 120);
  for (size_t k = 0; k < fs.length(); ++k) {
    CHECK(fs.f_max[k] == doctest::Approx(1.0));
    CHECK(fs.area[k] == doctest::Approx(1.0));
    CHECK(fs.d[k] == doctest::Approx(0.0));
  }
  CHECK(fs.t.front() == doctest::Approx(0.0));
  CHECK(fs.t.back() == doctest::Approx(1.19));
}

TEST_CASE("arm translation feeds straight into d") {
  TaxelTrial trial = constant_trial(120, 1.0);
  for (int k = 0; k < 120; ++k) trial.arm_position.push_back(0.001 * k);
  const FeatureSeries fs = extract_features(trial, 1.2);
  for (size_t k = 0; k < fs.length(); ++k) CHECK(fs.d[k] == doctest::Approx(0.001 * k));
  CHECK(fs.d[0] == 0.0);

  // explicit argument overrides the trial's own series
  std::vector<double> arm(120, 0.0);
  const FeatureSeries still = extract_features(trial, 1.2, &arm);
  for (size_t k = 0; k < still.length(); ++k) CHECK(still.d[k] == doctest::Approx(0.0));
}

TEST_CASE("no-component frames carry zeros and the previous d") {
  TaxelTrial trial = constant_trial(10, 1.0);
  trial.sample_rate = 100.0;
  for (int k = 0; k < 10; ++k) trial.arm_position.push_back(0.01 * k);
  trial.frames[3] = TaxelFrame::zeros(24, 16);  // contact drops out for one frame
  const FeatureSeries fs = extract_features(trial, 0.1);
  REQUIRE(fs.length() == 10);
  CHECK(fs.f_max[3] == 0.0);
  CHECK(fs.area[3] == 0.0);
  CHECK(fs.d[3] == doctest::Approx(fs.d[2]));
  CHECK(fs.d[4] == doctest::Approx(0.04));
}

TEST_CASE("short trials are padded with the per-channel mean") {
  TaxelTrial trial = constant_trial(60, 2.0);
  for (int k = 0; k < 60; ++k) trial.arm_position.push_back(0.001 * k);
  const FeatureSeries fs = extract_features(trial, 1.2);
  REQUIRE(fs.length() == 120);
  const double mean_d = mean_of(std::span(fs.d.data(), 60));
  for (size_t k = 60; k < 120; ++k) {
    CHECK(fs.f_max[k] == doctest::Approx(2.0));
    CHECK(fs.d[k] == doctest::Approx(mean_d));
  }
  CHECK(fs.t[119] == doctest::Approx(1.19));
}

TEST_CASE("feature scaling matches the closed form and detects degeneracy") {
  const ScaledSeries s = scale_features({1.0, 2.0, 3.0});
  CHECK(s.std_used == doctest::Approx(0.8164965809).epsilon(1e-9));
  CHECK(s.values[0] == doctest::Approx(-1.2247448714).epsilon(1e-9));
  CHECK(s.values[1] == doctest::Approx(0.0));
  CHECK(s.values[2] == doctest::Approx(1.2247448714).epsilon(1e-9));

  CHECK_THROWS_AS(scale_features({5.0, 5.0, 5.0}), DegenerateSeries);

  // scaled output has mean 0 / std 1, and rescaling is an identity
  Rng rng(5);
  std::vector<double> raw;
  for (int i = 0; i < 50; ++i) raw.push_back(rng.uniform(-2.0, 7.0));
  const ScaledSeries once = scale_features(raw);
  const double m = mean_of(once.values);
  const double sd = std::sqrt(population_variance(once.values, m));
  CHECK(std::abs(m) < 1e-9);
  CHECK(std::abs(sd - 1.0) < 1e-9);
  const ScaledSeries twice = scale_features(once.values);
  for (size_t i = 0; i < raw.size(); ++i)
    CHECK(twice.values[i] == doctest::Approx(once.values[i]).epsilon(1e-9));

  // reconstructing with the stored statistics recovers the input
  for (size_t i = 0; i < raw.size(); ++i)
    CHECK(once.values[i] * once.std_used + once.mean_used == doctest::Approx(raw[i]));
}

TEST_CASE("positive rescaling leaves the scaled series unchanged") {
  Rng rng(11);
  std::vector<double> raw;
  for (int i = 0; i < 80; ++i) raw.push_back(rng.uniform(0.0, 5.0));
  std::vector<double> scaled_up = raw;
  for (double& v : scaled_up) v *= 37.5;
  const auto a = scale_features(raw);
  const auto b = scale_features(scaled_up);
  for (size_t i = 0; i < raw.size(); ++i)
    CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9));
}

TEST_CASE("time normalization interpolates linearly and preserves endpoints") {
  const auto mid = time_normalize({0.0, 1.0}, 3);
  REQUIRE(mid.size() == 3);
  CHECK(mid[0] == 0.0);
  CHECK(mid[1] == doctest::Approx(0.5));
  CHECK(mid[2] == 1.0);

  // identity when target length matches
  const std::vector<double> id = {3.0, 1.0, 4.0, 1.0, 5.0};
  CHECK(time_normalize(id, 5) == id);

  // round trip through a denser grid reproduces piecewise-linear signals
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = rng.uniform_int(3, 30);
    std::vector<double> sig;
    for (int i = 0; i < n; ++i) sig.push_back(rng.uniform(-5.0, 5.0));
    // upsample to a grid that contains the original knots: k*(n-1)+1 points
    const int dense = rng.uniform_int(2, 5) * (n - 1) + 1;
    const auto up = time_normalize(sig, dense);
    const auto back = time_normalize(up, n);
    for (int i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(sig[i]).epsilon(1e-9));
  }
}

TEST_CASE("feature cache round trip") {
  TaxelTrial trial = constant_trial(30, 1.5);
  for (int k = 0; k < 30; ++k) trial.arm_position.push_back(0.002 * k);
  trial.label = Category::RigidMovable;
  FeatureSeries fs = extract_features(trial, 0.3);
  fs.label = trial.label;

  const auto dir = std::filesystem::temp_directory_path() / "tactile_feat_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "a.feat").string();
  write_features(fs, path);
  const FeatureSeries back = read_features(path);
  CHECK(back.label == fs.label);
  CHECK(back.t == fs.t);
  CHECK(back.f_max == fs.f_max);
  CHECK(back.area == fs.area);
  CHECK(back.d == fs.d);
}
