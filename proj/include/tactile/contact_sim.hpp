#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactile/taxel.hpp"

namespace tactile {

struct UnstableIntegration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 1-DOF lumped model: an equilibrium-point-controlled arm spring pushing
// against an object spring with stiction/kinetic Coulomb friction.
struct SimScenario {
  double m_arm = 0.5;     // kg
  double m_obj = 1.5;     // kg
  double k_act = 200.0;   // N/m, actuator spring
  double k_obj = 5000.0;  // N/m, object surface stiffness
  double mu_s = 0.4;
  double mu_k = 0.2;
  double L0 = 0.05;       // m, object-spring rest length
  double x0_arm = 0.0;
  double x0_obj = 0.06;   // contact surface sits at x0_obj - L0
  double x_eq_goal = 0.5;      // m
  double eq_velocity = 0.122;  // m/s, setpoint ramp speed
  double b_arm = -1.0;         // N*s/m; negative -> critical damping 2*sqrt(k_act*m_arm)
  // Hunt-Crossley contact damping, F = k*pen*(1 + hc*pen_rate). Zero makes
  // light movable objects chatter against the arm instead of sliding.
  double hc_damping = 1.5;  // s/m
  double g = 9.81;
  bool fixed = true;
  double duration = 1.0;  // s
  double dt = 1e-4;       // s

  double damping() const;
  void validate() const;
};

struct SimTrajectory {
  std::vector<double> t, x_arm, x_obj, v_arm, v_obj, F_act, F_surf, F_fr;
  double contact_onset_time = -1.0;  // first sample with F_surf > 0, -1 if none
};

// Semi-implicit Euler integration of the lumped model. The setpoint ramps
// from x0_arm at eq_velocity and saturates at x_eq_goal.
SimTrajectory simulate(const SimScenario& sc);

// How the scalar surface force is painted onto the taxel grid: a patch around
// contact_center that grows with force, the force split evenly across it.
// Footprint count is 1 + floor(area_gain * F^area_exponent); the Hertz-like
// default keeps the per-taxel reading growing with load instead of
// saturating at 1/area_gain.
struct RenderParams {
  int rows = 24;
  int cols = 16;
  double taxel_pitch = 0.009;
  double center_row = 11.5;
  double center_col = 7.5;
  double area_gain = 0.8;      // taxels at 1 N of surface force
  double area_exponent = 1.0 / 3.0;
  double max_radius = 6.0;     // taxels
  double noise_std = 0.005;    // N, per patch taxel, readings clamped at 0
  uint64_t seed = 0;
};

TaxelTrial render_taxels(const SimTrajectory& traj, const RenderParams& rp,
                         double sample_rate = 100.0);

// --- dataset generation ---

struct DatasetEntry {
  std::string file;  // relative to the manifest directory; empty if unwritten
  TaxelTrial trial;
  Category label = Category::RigidFixed;
  Condition condition;
  uint64_t seed = 0;
};

struct Dataset {
  std::vector<DatasetEntry> entries;
};

struct GenerationSpec {
  int trials_per_cell = 20;
  std::vector<Condition> conditions = {{Setting::None, Setting::None}};
  double jitter = 0.2;        // relative, applied to k_obj, m_obj and friction
  double gap_jitter = 0.3;    // relative, applied to the initial arm-object gap
  double noise_std = 0.005;   // N
  uint64_t seed = 0;
  std::string out_dir;        // when set, trials and manifest.csv are written

  void validate() const;
};

// Nominal scenario + render for a category under a robot condition, before
// per-trial jitter. Condition {None, None} is the stereotyped-motion setup.
SimScenario category_scenario(Category cat, const Condition& cond);
RenderParams category_render(Category cat);
double category_contact_threshold(Category cat);

// Deterministic in the master seed; per-trial seeds are derived by hashing
// the cell indices, so parallel and serial generation agree.
Dataset generate_dataset(const GenerationSpec& spec);

void write_manifest(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& manifest_path);

}  // namespace tactile
