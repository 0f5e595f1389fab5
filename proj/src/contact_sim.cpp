#include "tactile/contact_sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tactile/util.hpp"

namespace tactile {

double SimScenario::damping() const {
  return b_arm < 0.0 ? 2.0 * std::sqrt(k_act * m_arm) : b_arm;
}

void SimScenario::validate() const {
  if (m_arm <= 0.0 || m_obj <= 0.0 || k_act <= 0.0 || k_obj <= 0.0)
    throw std::invalid_argument("SimScenario: masses and stiffnesses must be positive");
  if (dt <= 0.0 || duration <= 0.0)
    throw std::invalid_argument("SimScenario: dt and duration must be positive");
  if (mu_k < 0.0 || mu_k > mu_s)
    throw std::invalid_argument("SimScenario: need 0 <= mu_k <= mu_s");
  if (x0_obj - x0_arm < L0)
    throw std::invalid_argument("SimScenario: initial penetration (x0_obj - x0_arm < L0)");
  if (eq_velocity < 0.0)
    throw std::invalid_argument("SimScenario: eq_velocity must be non-negative");
}

SimTrajectory simulate(const SimScenario& sc) {
  sc.validate();
  const double b = sc.damping();
  const int nsteps = int(std::lround(sc.duration / sc.dt));
  SimTrajectory tr;
  const size_t cap = size_t(nsteps) + 1;
  for (auto* v : {&tr.t, &tr.x_arm, &tr.x_obj, &tr.v_arm, &tr.v_obj, &tr.F_act, &tr.F_surf,
                  &tr.F_fr})
    v->reserve(cap);

  double xa = sc.x0_arm, va = 0.0, xo = sc.x0_obj, vo = 0.0;
  bool moving = false;
  const double breakaway = sc.mu_s * sc.m_obj * sc.g;
  const double kinetic = sc.mu_k * sc.m_obj * sc.g;

  for (int k = 0; k <= nsteps; ++k) {
    const double t = k * sc.dt;
    const double x_eq = sc.x0_arm + std::min(sc.eq_velocity * t, sc.x_eq_goal - sc.x0_arm);
    const double f_act = sc.k_act * (x_eq - xa);
    const double pen = sc.L0 - (xo - xa);
    const double pen_rate = va - vo;
    const double f_surf =
        pen > 0.0 ? std::max(0.0, sc.k_obj * pen * (1.0 + sc.hc_damping * pen_rate)) : 0.0;

    double f_fr;
    if (sc.fixed) {
      f_fr = f_surf;  // clamped object: the support balances the push
    } else if (!moving) {
      if (f_surf > breakaway) {
        moving = true;
        f_fr = kinetic;
      } else {
        f_fr = f_surf;  // stiction balances, object stays at rest
      }
    } else {
      f_fr = kinetic * (vo < 0.0 ? -1.0 : 1.0);
    }

    tr.t.push_back(t);
    tr.x_arm.push_back(xa);
    tr.x_obj.push_back(xo);
    tr.v_arm.push_back(va);
    tr.v_obj.push_back(vo);
    tr.F_act.push_back(f_act);
    tr.F_surf.push_back(f_surf);
    tr.F_fr.push_back(f_fr);
    if (tr.contact_onset_time < 0.0 && f_surf > 0.0) tr.contact_onset_time = t;
    if (k == nsteps) break;

    if (!sc.fixed && moving) {
      const double vo_new = vo + sc.dt * (f_surf - f_fr) / sc.m_obj;
      // re-latch when the velocity crosses zero inside the static cone
      if (vo != 0.0 && (vo_new == 0.0 || (vo_new > 0.0) != (vo > 0.0)) &&
          f_surf <= breakaway) {
        vo = 0.0;
        moving = false;
      } else {
        vo = vo_new;
        xo += sc.dt * vo;
      }
    }
    va += sc.dt * (f_act - f_surf - b * va) / sc.m_arm;
    xa += sc.dt * va;
    if (std::abs(xa) > 10.0 || std::abs(xo) > 10.0)
      throw UnstableIntegration("simulate: state exceeded 10 m at t=" + format_double(t) +
                                " (dt too large for this stiffness?)");
  }
  return tr;
}

TaxelTrial render_taxels(const SimTrajectory& traj, const RenderParams& rp,
                         double sample_rate) {
  if (traj.t.size() < 2) throw std::invalid_argument("render_taxels: trajectory too short");
  const double dt = traj.t[1] - traj.t[0];
  if (sample_rate > 1.0 / dt * (1.0 + 1e-9))
    throw std::invalid_argument("render_taxels: sample_rate exceeds simulation rate");
  const int stride = int(std::lround(1.0 / (sample_rate * dt)));

  // patch taxels in deterministic concentric order around the contact center
  std::vector<std::tuple<double, int, int>> candidates;
  for (int r = 0; r < rp.rows; ++r)
    for (int c = 0; c < rp.cols; ++c) {
      const double dr = r - rp.center_row, dc = c - rp.center_col;
      const double d2 = dr * dr + dc * dc;
      if (d2 <= rp.max_radius * rp.max_radius) candidates.push_back({d2, r, c});
    }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty())
    throw std::invalid_argument("render_taxels: contact patch falls outside the grid");

  Rng rng(rp.seed);
  TaxelTrial trial;
  trial.sample_rate = sample_rate;
  for (size_t idx = 0; idx < traj.t.size(); idx += size_t(stride)) {
    const double f = traj.F_surf[idx];
    TaxelFrame frame = TaxelFrame::zeros(rp.rows, rp.cols, rp.taxel_pitch);
    if (f > 0.0) {
      const size_t want = 1 + size_t(std::floor(rp.area_gain * std::pow(f, rp.area_exponent)));
      const size_t n = std::min(want, candidates.size());
      const double share = f / double(n);
      for (size_t i = 0; i < n; ++i) {
        auto [d2, r, c] = candidates[i];
        const double noisy = share + (rp.noise_std > 0.0 ? rng.normal(0.0, rp.noise_std) : 0.0);
        frame.at(r, c) = std::max(0.0, noisy);
      }
    }
    trial.frames.push_back(std::move(frame));
    trial.arm_position.push_back(traj.x_arm[idx]);
  }
  return trial;
}

// --- presets ---

namespace {

double condition_k_act(Setting s) {
  // 2.01 / 20.1 Nm/rad elbow settings over the 0.35 m lever arm
  switch (s) {
    case Setting::Low: return 16.4;
    case Setting::High: return 164.0;
    case Setting::None: return 200.0;
  }
  return 200.0;
}

double condition_velocity(Setting s) {
  // 5 / 20 deg/s joint speeds over the 0.35 m lever arm
  switch (s) {
    case Setting::Low: return 0.0305;
    case Setting::High: return 0.122;
    case Setting::None: return 0.122;
  }
  return 0.122;
}

bool is_rigid(Category c) {
  return c == Category::RigidFixed || c == Category::RigidMovable;
}
bool is_fixed(Category c) {
  return c == Category::RigidFixed || c == Category::SoftFixed;
}

}  // namespace

SimScenario category_scenario(Category cat, const Condition& cond) {
  SimScenario sc;
  sc.m_arm = 0.5;
  sc.k_act = condition_k_act(cond.stiffness);
  sc.eq_velocity = condition_velocity(cond.velocity);
  sc.x_eq_goal = 0.5;
  sc.x0_arm = 0.0;
  sc.L0 = 0.05;
  sc.x0_obj = sc.L0 + 0.01;  // contact surface 1 cm ahead of the arm
  sc.dt = 1e-4;
  sc.duration = cond.velocity == Setting::None ? 1.5 : 1.4;
  sc.fixed = is_fixed(cat);
  if (is_rigid(cat)) {
    sc.k_obj = 5000.0;
    // the 1.5 kg cube of the paper's example never slips under the weak-arm
    // settings; the movable preset is a light rigid object instead
    sc.m_obj = cat == Category::RigidMovable ? 0.15 : 1.5;
    sc.mu_s = 0.4;
    sc.mu_k = 0.2;
  } else {
    sc.k_obj = 50.0;
    // fixed soft preset keeps the paper's 20 g foam cube; the movable preset
    // is pillow-class so its friction band overlaps the other categories
    sc.m_obj = cat == Category::SoftMovable ? 0.2 : 0.02;
    sc.mu_s = 0.5;
    sc.mu_k = 0.3;
  }
  return sc;
}

RenderParams category_render(Category cat) {
  RenderParams rp;
  rp.area_gain = is_rigid(cat) ? 2.0 : 5.0;
  return rp;
}

double category_contact_threshold(Category cat) {
  // soft objects spread force over many taxels, so their per-taxel readings
  // need a lower onset threshold (the paper used per-object thresholds)
  return is_rigid(cat) ? 0.08 : 0.02;
}

void GenerationSpec::validate() const {
  if (trials_per_cell < 1)
    throw std::invalid_argument("GenerationSpec: trials_per_cell must be >= 1");
  if (conditions.empty())
    throw std::invalid_argument("GenerationSpec: need at least one condition");
  if (jitter < 0.0 || jitter >= 1.0 || gap_jitter < 0.0 || gap_jitter >= 1.0)
    throw std::invalid_argument("GenerationSpec: jitter fractions must be in [0, 1)");
  if (noise_std < 0.0) throw std::invalid_argument("GenerationSpec: noise_std must be >= 0");
}

Dataset generate_dataset(const GenerationSpec& spec) {
  spec.validate();
  Dataset ds;
  int global = 0;
  for (size_t ci = 0; ci < spec.conditions.size(); ++ci) {
    const Condition& cond = spec.conditions[ci];
    for (int c = 0; c < kNumCategories; ++c) {
      const Category cat = Category(c);
      for (int j = 0; j < spec.trials_per_cell; ++j, ++global) {
        const uint64_t trial_seed = mix_seed(spec.seed, ci, uint64_t(c), uint64_t(j));
        Rng rng(trial_seed);
        SimScenario sc = category_scenario(cat, cond);
        sc.k_obj *= 1.0 + rng.uniform(-spec.jitter, spec.jitter);
        sc.m_obj *= 1.0 + rng.uniform(-spec.jitter, spec.jitter);
        const double fric = 1.0 + rng.uniform(-spec.jitter, spec.jitter);
        sc.mu_s *= fric;
        sc.mu_k *= fric;
        const double gap = (sc.x0_obj - sc.x0_arm - sc.L0) *
                           (1.0 + rng.uniform(-spec.gap_jitter, spec.gap_jitter));
        sc.x0_obj = sc.x0_arm + sc.L0 + gap;

        RenderParams rp = category_render(cat);
        rp.noise_std = spec.noise_std;
        rp.center_row += rng.uniform(-1.5, 1.5);
        rp.center_col += rng.uniform(-1.5, 1.5);
        rp.seed = mix_seed(trial_seed, 0x52454e44);  // render stream

        DatasetEntry entry;
        entry.label = cat;
        entry.condition = cond;
        entry.seed = trial_seed;
        char name[64];
        std::snprintf(name, sizeof(name), "trial_%04d_%s.csv", global, to_string(cat));
        entry.file = name;
        try {
          entry.trial = render_taxels(simulate(sc), rp, 100.0);
        } catch (const std::exception& e) {
          throw std::runtime_error(std::string("generate_dataset: cell ") + to_string(cat) +
                                   "/v=" + to_string(cond.velocity) +
                                   "/k=" + to_string(cond.stiffness) + " trial " +
                                   std::to_string(j) + " failed: " + e.what());
        }
        entry.trial.contact_threshold = category_contact_threshold(cat);
        entry.trial.label = cat;
        entry.trial.condition = cond;
        ds.entries.push_back(std::move(entry));
      }
    }
  }
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    for (const DatasetEntry& e : ds.entries)
      write_trial(e.trial, (std::filesystem::path(spec.out_dir) / e.file).string());
    write_manifest(ds, spec.out_dir);
  }
  return ds;
}

void write_manifest(const Dataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / "manifest.csv").string();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for write: " + path);
  out << "file,label,velocity_setting,stiffness_setting,seed\n";
  for (const DatasetEntry& e : ds.entries)
    out << e.file << ',' << to_string(e.label) << ',' << to_string(e.condition.velocity)
        << ',' << to_string(e.condition.stiffness) << ',' << e.seed << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

Dataset load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot open manifest: " + manifest_path);
  const std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty manifest: " + manifest_path);
  if (trim(line) != "file,label,velocity_setting,stiffness_setting,seed")
    throw FormatError("unexpected manifest header in " + manifest_path);
  Dataset ds;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 5) throw FormatError("manifest row needs 5 fields: " + line);
    DatasetEntry e;
    e.file = cells[0];
    const auto label = parse_label(cells[1]);
    if (!label) throw FormatError("manifest rows must carry a category label: " + line);
    e.label = *label;
    e.condition.velocity = parse_setting(cells[2]);
    e.condition.stiffness = parse_setting(cells[3]);
    e.seed = std::stoull(cells[4]);
    e.trial = read_trial((dir / e.file).string());
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

}  // namespace tactile
