#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tactile/contact_sim.hpp"
#include "tactile/features.hpp"
#include "tactile/util.hpp"

using namespace tactile;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double series_spring_force(const SimScenario& sc) {
  const double x_contact = sc.x0_obj - sc.L0;
  const double deflection = sc.x_eq_goal - x_contact;
  return sc.k_act * sc.k_obj / (sc.k_act + sc.k_obj) * deflection;
}

}  // namespace

TEST_CASE("free arm settles at the setpoint without contact") {
  SimScenario sc;
  sc.x0_obj = 5.0;  // object out of reach
  sc.eq_velocity = 1.0;
  sc.x_eq_goal = 0.5;
  sc.duration = 2.0;
  const SimTrajectory tr = simulate(sc);
  CHECK(tr.contact_onset_time < 0.0);
  for (double f : tr.F_surf) CHECK(f == 0.0);
  CHECK(tr.x_arm.back() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(std::abs(tr.v_arm.back()) < 1e-4);
}

TEST_CASE("rigid-fixed steady state matches the series-spring equilibrium") {
  SimScenario sc;  // paper parameter values: k_act 200, k_obj 5000
  sc.eq_velocity = 1.0;
  sc.duration = 2.0;
  const double expect = series_spring_force(sc);
  const SimTrajectory tr = simulate(sc);
  CHECK(tr.F_surf.back() == doctest::Approx(expect).epsilon(0.01));

  // cross-check against a 10x finer integration
  SimScenario fine = sc;
  fine.dt = sc.dt / 10.0;
  const SimTrajectory trf = simulate(fine);
  CHECK(trf.F_surf.back() == doctest::Approx(expect).epsilon(0.01));
  CHECK(std::abs(tr.F_surf.back() - trf.F_surf.back()) < 0.005 * expect);
}

TEST_CASE("undamped contact-free oscillator conserves energy") {
  SimScenario sc;
  sc.k_act = 50.0;
  sc.m_arm = 0.5;
  sc.b_arm = 0.0;
  sc.x0_arm = 0.5;
  sc.x_eq_goal = 0.0;  // setpoint pinned at 0 from t=0 (goal below start)
  sc.x0_obj = 5.0;
  sc.duration = 1.0;
  sc.dt = 1e-4;
  const SimTrajectory tr = simulate(sc);
  const double e0 = 0.5 * sc.k_act * sc.x0_arm * sc.x0_arm;
  double worst = 0.0;
  for (size_t k = 0; k < tr.t.size(); ++k) {
    const double e = 0.5 * sc.m_arm * tr.v_arm[k] * tr.v_arm[k] +
                     0.5 * sc.k_act * tr.x_arm[k] * tr.x_arm[k];
    worst = std::max(worst, std::abs(e - e0) / e0);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("contact force is non-negative and vanishes when separated") {
  for (Category cat : {Category::RigidMovable, Category::SoftMovable}) {
    const SimTrajectory tr = simulate(category_scenario(cat, {}));
    for (size_t k = 0; k < tr.t.size(); ++k) {
      CHECK(tr.F_surf[k] >= 0.0);
      if (tr.x_obj[k] - tr.x_arm[k] >= 0.05) CHECK(tr.F_surf[k] == 0.0);
    }
  }
}

TEST_CASE("fixed objects never move; movable objects respect stiction") {
  const SimTrajectory fixed = simulate(category_scenario(Category::RigidFixed, {}));
  for (double x : fixed.x_obj) CHECK(x == fixed.x_obj.front());

  for (Category cat : {Category::RigidMovable, Category::SoftMovable}) {
    const SimScenario sc = category_scenario(cat, {});
    const double breakaway = sc.mu_s * sc.m_obj * sc.g;
    const SimTrajectory tr = simulate(sc);
    bool broke = false;
    for (size_t k = 0; k < tr.t.size(); ++k) {
      if (!broke && tr.F_surf[k] > breakaway) broke = true;
      if (!broke) CHECK(tr.x_obj[k] == tr.x_obj.front());
    }
    CHECK(broke);
    CHECK(tr.x_obj.back() > tr.x_obj.front());
  }
}

TEST_CASE("halving dt moves the final arm position by less than half a percent") {
  for (int c = 0; c < kNumCategories; ++c) {
    SimScenario sc = category_scenario(Category(c), {});
    const SimTrajectory coarse = simulate(sc);
    sc.dt /= 2.0;
    const SimTrajectory fine = simulate(sc);
    const double ref = std::max(std::abs(fine.x_arm.back()), 1e-6);
    CHECK(std::abs(coarse.x_arm.back() - fine.x_arm.back()) / ref < 0.005);
  }
}

TEST_CASE("category force traces follow the published trends") {
  const SimTrajectory rf = simulate(category_scenario(Category::RigidFixed, {}));
  const SimTrajectory sf = simulate(category_scenario(Category::SoftFixed, {}));
  const double rf_peak = *std::max_element(rf.F_surf.begin(), rf.F_surf.end());
  const double sf_peak = *std::max_element(sf.F_surf.begin(), sf.F_surf.end());
  CHECK(rf_peak > sf_peak);

  // rigid rises faster: time from onset to 1 N is shorter
  auto time_to = [](const SimTrajectory& tr, double level) {
    for (size_t k = 0; k < tr.t.size(); ++k)
      if (tr.F_surf[k] >= level) return tr.t[k] - tr.contact_onset_time;
    return 1e9;
  };
  CHECK(time_to(rf, 1.0) < time_to(sf, 1.0));

  // movable traces settle to a plateau near the friction forces; the first
  // touch transient may overshoot, so judge the sliding phase by its median
  for (Category cat : {Category::RigidMovable, Category::SoftMovable}) {
    const SimScenario sc = category_scenario(cat, {});
    const SimTrajectory tr = simulate(sc);
    const double breakaway = sc.mu_s * sc.m_obj * sc.g;
    const double kinetic = sc.mu_k * sc.m_obj * sc.g;
    const double peak = *std::max_element(tr.F_surf.begin(), tr.F_surf.end());
    CHECK(peak >= breakaway);
    std::vector<double> tail(tr.F_surf.begin() + tr.F_surf.size() / 2, tr.F_surf.end());
    std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
    const double plateau = tail[tail.size() / 2];
    CHECK(plateau >= 0.5 * kinetic);
    CHECK(plateau <= 2.5 * breakaway);
  }
}

TEST_CASE("instability is reported instead of silently diverging") {
  SimScenario sc;
  sc.dt = 0.05;  // far too coarse for a 5000 N/m contact
  sc.eq_velocity = 5.0;
  CHECK_THROWS_AS(simulate(sc), UnstableIntegration);
}

TEST_CASE("rendering deposits the surface force over a growing patch") {
  SimTrajectory flat;
  for (int k = 0; k < 201; ++k) {
    flat.t.push_back(k * 0.01);
    flat.F_surf.push_back(4.0);
    flat.x_arm.push_back(0.123);
  }
  RenderParams rp;
  rp.area_gain = 0.8;
  rp.area_exponent = 1.0;  // 1 + floor(0.8 * 4) = 4 taxels
  rp.noise_std = 0.0;
  const TaxelTrial trial = render_taxels(flat, rp, 100.0);
  REQUIRE(!trial.frames.empty());
  for (const TaxelFrame& f : trial.frames) {
    CHECK(f.total_force() == doctest::Approx(4.0).epsilon(1e-12));
    int nonzero = 0;
    for (double v : f.forces)
      if (v > 0.0) {
        CHECK(v == doctest::Approx(1.0));
        ++nonzero;
      }
    CHECK(nonzero == 4);
  }
  CHECK(trial.arm_position.front() == doctest::Approx(0.123));

  SimTrajectory zero = flat;
  for (double& f : zero.F_surf) f = 0.0;
  RenderParams noisy;
  noisy.noise_std = 0.01;
  const TaxelTrial empty = render_taxels(zero, noisy, 100.0);
  for (const TaxelFrame& f : empty.frames) CHECK(f.total_force() == 0.0);
}

TEST_CASE("hertz-like footprint keeps the peak taxel reading growing with load") {
  RenderParams rp;  // default 2/3 exponent
  rp.noise_std = 0.0;
  auto peak_at = [&](double force) {
    SimTrajectory tr;
    for (int k = 0; k < 11; ++k) {
      tr.t.push_back(k * 0.01);
      tr.F_surf.push_back(force);
      tr.x_arm.push_back(0.0);
    }
    return render_taxels(tr, rp, 100.0).frames[5].max_force();
  };
  const double p1 = peak_at(1.0), p8 = peak_at(8.0), p27 = peak_at(27.0);
  CHECK(p8 > 1.5 * p1);   // no saturation plateau
  CHECK(p27 > 1.3 * p8);
}

TEST_CASE("soft rendering spreads the same force over more taxels") {
  SimTrajectory flat;
  for (int k = 0; k < 101; ++k) {
    flat.t.push_back(k * 0.01);
    flat.F_surf.push_back(2.0);
    flat.x_arm.push_back(0.0);
  }
  const TaxelTrial rigid = render_taxels(flat, category_render(Category::RigidFixed), 100.0);
  const TaxelTrial soft = render_taxels(flat, category_render(Category::SoftFixed), 100.0);
  const auto rigid_mask =
      threshold_frame(rigid.frames[50], category_contact_threshold(Category::RigidFixed));
  const auto soft_mask =
      threshold_frame(soft.frames[50], category_contact_threshold(Category::SoftFixed));
  CHECK(soft_mask.count() > rigid_mask.count());
}

TEST_CASE("dataset generation counts cells and stays reproducible") {
  GenerationSpec spec;
  spec.trials_per_cell = 1;
  spec.conditions = {{Setting::Low, Setting::Low},
                     {Setting::Low, Setting::High},
                     {Setting::High, Setting::Low},
                     {Setting::High, Setting::High}};
  spec.seed = 17;

  const auto base = std::filesystem::temp_directory_path() / "tactile_gen_test";
  std::filesystem::remove_all(base);
  GenerationSpec a = spec, b = spec;
  a.out_dir = (base / "a").string();
  b.out_dir = (base / "b").string();
  const Dataset da = generate_dataset(a);
  const Dataset db = generate_dataset(b);
  REQUIRE(da.entries.size() == 16);  // 4 categories x 4 conditions x 1

  CHECK(slurp((base / "a" / "manifest.csv").string()) ==
        slurp((base / "b" / "manifest.csv").string()));
  for (const DatasetEntry& e : da.entries) {
    CHECK(slurp((base / "a" / e.file).string()) == slurp((base / "b" / e.file).string()));
    CHECK(slurp((base / "a" / (e.file + ".arm")).string()) ==
          slurp((base / "b" / (e.file + ".arm")).string()));
  }

  // loading the manifest reproduces the in-memory dataset
  const Dataset loaded = load_dataset((base / "a" / "manifest.csv").string());
  REQUIRE(loaded.entries.size() == da.entries.size());
  for (size_t i = 0; i < loaded.entries.size(); ++i) {
    CHECK(loaded.entries[i].label == da.entries[i].label);
    CHECK(loaded.entries[i].condition == da.entries[i].condition);
    CHECK(loaded.entries[i].seed == da.entries[i].seed);
    REQUIRE(loaded.entries[i].trial.frames.size() == da.entries[i].trial.frames.size());
    CHECK(loaded.entries[i].trial.frames[40].forces == da.entries[i].trial.frames[40].forces);
    CHECK(loaded.entries[i].trial.arm_position == da.entries[i].trial.arm_position);
  }

  // every generated trial has a detectable onset under its own threshold
  for (const DatasetEntry& e : da.entries) CHECK_NOTHROW(detect_onset(e.trial));
  std::filesystem::remove_all(base);
}

TEST_CASE("generated features follow the category ordering") {
  GenerationSpec spec;
  spec.trials_per_cell = 4;
  spec.seed = 99;
  const Dataset ds = generate_dataset(spec);
  REQUIRE(ds.entries.size() == 16);

  double rf_peak = 0.0, sf_peak = 0.0;
  double fixed_d = 0.0, movable_d = 0.0;
  int n_fixed = 0, n_movable = 0;
  for (const DatasetEntry& e : ds.entries) {
    const FeatureSeries fs = extract_features(e.trial, 1.2);
    double peak_total = 0.0;
    for (const TaxelFrame& f : e.trial.frames)
      peak_total = std::max(peak_total, f.total_force());
    if (e.label == Category::RigidFixed) rf_peak = std::max(rf_peak, peak_total);
    if (e.label == Category::SoftFixed) sf_peak = std::max(sf_peak, peak_total);
    const bool is_fixed =
        e.label == Category::RigidFixed || e.label == Category::SoftFixed;
    (is_fixed ? fixed_d : movable_d) += fs.d.back();
    (is_fixed ? n_fixed : n_movable) += 1;
  }
  CHECK(rf_peak > sf_peak);  // rigid-fixed carries the largest contact force
  CHECK(movable_d / n_movable > fixed_d / n_fixed);
  CHECK(rf_peak > 0.0);
}
