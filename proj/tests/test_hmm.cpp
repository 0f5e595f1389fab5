#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "tactile/hmm.hpp"
#include "tactile/util.hpp"

using namespace tactile;

namespace {

ObsSequence seq1(std::initializer_list<double> values) {
  ObsSequence s;
  s.dim = 1;
  s.values = values;
  return s;
}

// noisy staircase through the given levels, equal dwell per level
ObsSequence staircase(Rng& rng, const std::vector<double>& levels, int dwell, double noise) {
  ObsSequence s;
  s.dim = 1;
  for (double level : levels)
    for (int k = 0; k < dwell; ++k) s.values.push_back(level + rng.normal(0.0, noise));
  return s;
}

}  // namespace

TEST_CASE("init segments sequences into per-state gaussians") {
  TrainConfig cfg;
  cfg.n_states = 2;
  const std::vector<ObsSequence> train = {seq1({0, 0, 1, 1}), seq1({0, 0, 1, 1}),
                                          seq1({0, 0, 1, 1})};
  const GaussianHmm m = init_left_right(train, cfg);
  m.validate();
  CHECK(m.states[0].mean[0] == doctest::Approx(0.0));
  CHECK(m.states[1].mean[0] == doctest::Approx(1.0));
  CHECK(m.states[0].cov[0] == doctest::Approx(cfg.variance_floor));  // clamped
  CHECK(m.a(0, 0) == 0.5);
  CHECK(m.a(0, 1) == 0.5);
  CHECK(m.a(1, 1) == 1.0);
  CHECK(m.initial[0] == 1.0);

  TrainConfig ten;
  ten.n_states = 10;
  const std::vector<ObsSequence> consts = {seq1({3, 3, 3, 3, 3, 3, 3, 3, 3, 3}),
                                           seq1({3, 3, 3, 3, 3, 3, 3, 3, 3, 3})};
  const GaussianHmm mc = init_left_right(consts, ten);
  for (const auto& st : mc.states) CHECK(st.mean[0] == doctest::Approx(3.0));

  CHECK_THROWS_AS(init_left_right({seq1({1, 2})}, cfg), std::invalid_argument);
  TrainConfig many;
  many.n_states = 5;
  CHECK_THROWS_AS(init_left_right({seq1({1, 2, 3}), seq1({1, 2, 3})}, many), TooShortSequence);
}

TEST_CASE("init recovers staircase levels within sampling error") {
  Rng rng(314);
  const std::vector<double> levels = {0.0, 2.0, 5.0};
  const double noise = 0.1;
  const int dwell = 10, n_seq = 30;
  std::vector<ObsSequence> train;
  for (int i = 0; i < n_seq; ++i) train.push_back(staircase(rng, levels, dwell, noise));
  TrainConfig cfg;
  cfg.n_states = 3;
  const GaussianHmm m = init_left_right(train, cfg);
  const double tol = 3.0 * noise / std::sqrt(double(dwell * n_seq));
  for (int j = 0; j < 3; ++j) CHECK(std::abs(m.states[j].mean[0] - levels[j]) < 5.0 * tol);
}

TEST_CASE("forward and viterbi match exhaustive enumeration") {
  Rng rng(42);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = rng.uniform_int(1, 3);
    const int T = rng.uniform_int(1, 6);
    const int dim = rng.uniform_int(1, 2);
    const bool lr = rng.uniform() < 0.5;
    const bool terminal = T >= n && rng.uniform() < 0.3;
    const GaussianHmm m = oracle::random_model(rng, n, dim, lr, terminal);
    const ObsSequence seq = oracle::random_sequence(rng, T, dim);

    const double f = forward_loglik(m, seq);
    const double f_oracle = oracle::enumerate_forward(m, seq);
    CHECK(f == doctest::Approx(f_oracle).epsilon(1e-9));

    const ViterbiResult v = viterbi(m, seq);
    const auto [best_path, best_lp] = oracle::enumerate_viterbi(m, seq);
    CHECK(v.log_prob == doctest::Approx(best_lp).epsilon(1e-9));
    CHECK(oracle::path_log_prob(m, seq, v.path) == doctest::Approx(best_lp).epsilon(1e-9));

    // max over paths can never beat the sum over paths
    CHECK(v.log_prob <= f + 1e-9);

    // left-right paths may only move forward one state at a time
    if (lr) {
      CHECK(v.path.front() == 0);
      for (size_t t = 1; t < v.path.size(); ++t) {
        CHECK(v.path[t] >= v.path[t - 1]);
        CHECK(v.path[t] - v.path[t - 1] <= 1);
      }
      if (m.terminal) CHECK(v.path.back() == n - 1);
    }
  }
}

TEST_CASE("terminal scoring rejects sequences that cannot reach the last state") {
  Rng rng(21);
  const GaussianHmm m = oracle::random_model(rng, 3, 1, true, true);
  const ObsSequence seq = oracle::random_sequence(rng, 2, 1);  // T < N
  CHECK(forward_loglik(m, seq) == -std::numeric_limits<double>::infinity());
  CHECK(viterbi(m, seq).log_prob == -std::numeric_limits<double>::infinity());
}

TEST_CASE("single-state forward is the sum of emission densities") {
  Rng rng(7);
  GaussianHmm m = oracle::random_model(rng, 1, 1, true);
  const ObsSequence seq = oracle::random_sequence(rng, 5, 1);
  double expect = 0.0;
  for (int t = 0; t < 5; ++t) expect += oracle::gauss_logpdf(m.states[0], seq.frame(t), 1);
  CHECK(forward_loglik(m, seq) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("viterbi on length-1 sequence starts in the entry state") {
  Rng rng(9);
  const GaussianHmm m = oracle::random_model(rng, 3, 1, true);
  ObsSequence seq = seq1({0.3});
  const ViterbiResult v = viterbi(m, seq);
  REQUIRE(v.path.size() == 1);
  CHECK(v.path[0] == 0);  // pi forces the first state
}

TEST_CASE("an implausible trailing observation drops the log-likelihood") {
  Rng rng(13);
  const GaussianHmm m = oracle::random_model(rng, 2, 1, true);
  ObsSequence seq = seq1({0.0, 0.5, 0.2});
  const double base = forward_loglik(m, seq);
  ObsSequence worse = seq;
  worse.values.push_back(1e3);
  CHECK(forward_loglik(m, worse) < base - 100.0);
}

TEST_CASE("baum-welch matches the enumeration EM oracle at N=2,T=4") {
  Rng rng(77);
  std::vector<ObsSequence> train = {seq1({0.1, 0.3, 0.9, 1.2}), seq1({-0.1, 0.2, 1.1, 0.8}),
                                    seq1({0.0, 0.4, 0.7, 1.3})};
  TrainConfig cfg;
  cfg.n_states = 2;
  cfg.max_iterations = 3;
  cfg.tolerance = 1e-12;

  GaussianHmm model = init_left_right(train, cfg);
  GaussianHmm reference = model;
  for (int it = 0; it < cfg.max_iterations; ++it)
    reference = oracle::enumerate_em_step(reference, train, cfg.variance_floor);

  const TrainResult res = baum_welch(model, train, cfg);
  REQUIRE(res.iterations == cfg.max_iterations);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(res.model.a(i, j) == doctest::Approx(reference.a(i, j)).epsilon(1e-8));
  for (int j = 0; j < 2; ++j) {
    CHECK(res.model.states[j].mean[0] ==
          doctest::Approx(reference.states[j].mean[0]).epsilon(1e-8));
    CHECK(res.model.states[j].cov[0] ==
          doctest::Approx(reference.states[j].cov[0]).epsilon(1e-8));
  }

  // final likelihood agrees with enumeration on the final model
  double ll_impl = 0.0, ll_oracle = 0.0;
  for (const auto& seq : train) {
    ll_impl += forward_loglik(res.model, seq);
    ll_oracle += oracle::enumerate_forward(reference, seq);
  }
  CHECK(ll_impl == doctest::Approx(ll_oracle).epsilon(1e-8));
}

TEST_CASE("terminal-mode baum-welch matches the enumeration EM oracle") {
  std::vector<ObsSequence> train = {seq1({0.2, 0.4, 1.0, 1.1}), seq1({0.0, 0.3, 0.8, 1.2}),
                                    seq1({0.1, 0.5, 0.9, 1.0})};
  TrainConfig cfg;
  cfg.n_states = 2;
  cfg.max_iterations = 3;
  cfg.tolerance = 1e-12;
  cfg.terminal = true;

  GaussianHmm model = init_left_right(train, cfg);
  REQUIRE(model.terminal);
  GaussianHmm reference = model;
  for (int it = 0; it < cfg.max_iterations; ++it)
    reference = oracle::enumerate_em_step(reference, train, cfg.variance_floor);

  const TrainResult res = baum_welch(model, train, cfg);
  REQUIRE(res.iterations == cfg.max_iterations);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(res.model.a(i, j) == doctest::Approx(reference.a(i, j)).epsilon(1e-8));
  for (int j = 0; j < 2; ++j) {
    CHECK(res.model.states[j].mean[0] ==
          doctest::Approx(reference.states[j].mean[0]).epsilon(1e-8));
    CHECK(res.model.states[j].cov[0] ==
          doctest::Approx(reference.states[j].cov[0]).epsilon(1e-8));
  }
}

TEST_CASE("an already-converged model is returned unchanged") {
  Rng rng(5);
  std::vector<ObsSequence> train;
  for (int i = 0; i < 4; ++i) train.push_back(staircase(rng, {0.0, 1.0}, 4, 0.05));
  TrainConfig cfg;
  cfg.n_states = 2;
  cfg.tolerance = 1e9;  // nothing can improve this much
  const GaussianHmm init = init_left_right(train, cfg);
  const TrainResult res = baum_welch(init, train, cfg);
  CHECK(res.loglik_trace.size() == 1);
  CHECK(res.iterations == 0);
  CHECK(res.converged);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(res.model.a(i, j) == init.a(i, j));
  for (int j = 0; j < 2; ++j) CHECK(res.model.states[j].mean[0] == init.states[j].mean[0]);
}

TEST_CASE("training log-likelihood is monotone and preserves structure") {
  Rng rng(1234);
  for (int rep = 0; rep < 100; ++rep) {
    const int N = rng.uniform_int(2, 4);
    std::vector<double> levels;
    for (int j = 0; j < N; ++j) levels.push_back(rng.uniform(-2.0, 2.0));
    std::vector<ObsSequence> train;
    const int n_seq = rng.uniform_int(3, 6);
    for (int i = 0; i < n_seq; ++i) train.push_back(staircase(rng, levels, 5, 0.2));

    TrainConfig cfg;
    cfg.n_states = N;
    cfg.max_iterations = 15;
    cfg.tolerance = 1e-7;
    const TrainResult res = baum_welch(init_left_right(train, cfg), train, cfg);

    for (size_t i = 1; i < res.loglik_trace.size(); ++i)
      CHECK(res.loglik_trace[i] >= res.loglik_trace[i - 1] - 1e-6);
    CHECK(res.last_improvement >= -1e-6);

    // row-stochastic and left-right zero pattern survive re-estimation
    res.model.validate();
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (j < i || j > i + 1) CHECK(res.model.a(i, j) == 0.0);
  }
}

TEST_CASE("bank training classifies its own categories and breaks ties by order") {
  Rng rng(2718);
  // four categories with different staircase shapes
  const std::vector<std::vector<double>> shapes = {
      {0.0, 1.0, 2.0}, {2.0, 1.0, 0.0}, {0.0, 2.0, 0.0}, {1.0, 1.0, 1.0}};
  std::vector<FeatureSeries> train;
  for (int c = 0; c < kNumCategories; ++c) {
    for (int i = 0; i < 6; ++i) {
      FeatureSeries fs;
      fs.label = Category(c);
      const ObsSequence s = staircase(rng, shapes[c], 10, 0.05);
      fs.f_max = s.values;
      for (size_t k = 0; k < fs.f_max.size(); ++k) {
        fs.t.push_back(k * 0.01);
        fs.area.push_back(1.0);
        fs.d.push_back(0.0);
      }
      train.push_back(std::move(fs));
    }
  }
  TrainConfig cfg;
  cfg.n_states = 3;
  const HmmBank bank = train_bank(train, FeatureSet::Force, cfg);
  CHECK(bank.complete(FeatureSet::Force));
  CHECK(!bank.complete(FeatureSet::Area));

  int correct = 0;
  for (const FeatureSeries& fs : train)
    correct += classify(bank, fs, FeatureSet::Force).category == *fs.label;
  CHECK(correct == int(train.size()));

  // identical models for every category -> fixed-order tie-break picks RF
  HmmBank tie;
  for (int c = 0; c < kNumCategories; ++c)
    tie.models[{Category(c), FeatureSet::Force}] =
        bank.models.at({Category::RigidFixed, FeatureSet::Force});
  const Classification res = classify(tie, train.front(), FeatureSet::Force);
  CHECK(res.category == Category::RigidFixed);
  CHECK(res.scores[0] == res.scores[1]);
}

TEST_CASE("multivariate classification is invariant to positive feature rescaling") {
  Rng rng(31);
  std::vector<FeatureSeries> train;
  for (int c = 0; c < kNumCategories; ++c) {
    for (int i = 0; i < 5; ++i) {
      FeatureSeries fs;
      fs.label = Category(c);
      const int T = 40;
      for (int k = 0; k < T; ++k) {
        fs.t.push_back(k * 0.01);
        fs.f_max.push_back((c + 1) * 0.5 * k / T + rng.normal(0.0, 0.02));
        fs.area.push_back(1.0);
        fs.d.push_back((4 - c) * 0.01 * std::sqrt(double(k)) + rng.normal(0.0, 1e-4));
      }
      train.push_back(std::move(fs));
    }
  }
  TrainConfig cfg;
  cfg.n_states = 4;
  const HmmBank bank = train_bank(train, FeatureSet::ForceMotion, cfg);

  for (const FeatureSeries& fs : train) {
    FeatureSeries scaled = fs;
    for (double& v : scaled.f_max) v *= 12.0;
    for (double& v : scaled.d) v *= 0.003;
    const auto a = classify(bank, fs, FeatureSet::ForceMotion);
    const auto b = classify(bank, scaled, FeatureSet::ForceMotion);
    CHECK(a.category == b.category);
  }
}

TEST_CASE("model file round trip is bit-exact") {
  Rng rng(555);
  for (int dim : {1, 2}) {
    const GaussianHmm m = oracle::random_model(rng, 3, dim, dim == 1);
    const auto dir = std::filesystem::temp_directory_path() / "tactile_hmm_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / ("m" + std::to_string(dim) + ".hmm")).string();
    write_model(m, path);
    const GaussianHmm back = read_model(path);
    CHECK(back.n_states == m.n_states);
    CHECK(back.dim == m.dim);
    CHECK(back.left_right == m.left_right);
    CHECK(back.initial == m.initial);
    CHECK(back.transitions == m.transitions);
    for (int j = 0; j < m.n_states; ++j) {
      CHECK(back.states[j].mean == m.states[j].mean);
      CHECK(back.states[j].cov == m.states[j].cov);
    }
    const std::string path2 = path + "2";
    write_model(back, path2);
    std::ifstream a(path), b(path2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
}

TEST_CASE("degenerate feature series propagates out of classify") {
  FeatureSeries fs;
  for (int k = 0; k < 20; ++k) {
    fs.t.push_back(k * 0.01);
    fs.f_max.push_back(1.0);  // constant force
    fs.area.push_back(1.0);
    fs.d.push_back(k * 0.001);
  }
  CHECK_THROWS_AS(observation_sequence(fs, FeatureSet::ForceMotion), DegenerateSeries);
}
