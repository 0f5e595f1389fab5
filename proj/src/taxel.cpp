#include "tactile/taxel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tactile/util.hpp"

namespace tactile {

const char* to_string(Category c) {
  switch (c) {
    case Category::RigidFixed: return "RF";
    case Category::RigidMovable: return "RM";
    case Category::SoftFixed: return "SF";
    case Category::SoftMovable: return "SM";
  }
  return "?";
}

std::optional<Category> parse_label(const std::string& token) {
  if (token == "RF") return Category::RigidFixed;
  if (token == "RM") return Category::RigidMovable;
  if (token == "SF") return Category::SoftFixed;
  if (token == "SM") return Category::SoftMovable;
  if (token == "unknown") return std::nullopt;
  throw FormatError("unknown label token: '" + token + "'");
}

const char* to_string(Setting s) {
  switch (s) {
    case Setting::None: return "none";
    case Setting::Low: return "low";
    case Setting::High: return "high";
  }
  return "?";
}

Setting parse_setting(const std::string& token) {
  if (token == "none") return Setting::None;
  if (token == "low") return Setting::Low;
  if (token == "high") return Setting::High;
  throw FormatError("unknown setting token: '" + token + "'");
}

TaxelFrame TaxelFrame::zeros(int rows, int cols, double pitch) {
  TaxelFrame f;
  f.rows = rows;
  f.cols = cols;
  f.taxel_pitch = pitch;
  f.forces.assign(size_t(rows) * cols, 0.0);
  return f;
}

double TaxelFrame::max_force() const {
  double m = 0.0;
  for (double v : forces) m = std::max(m, v);
  return m;
}

double TaxelFrame::total_force() const {
  double s = 0.0;
  for (double v : forces) s += v;
  return s;
}

void TaxelFrame::validate() const {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("TaxelFrame: grid dimensions must be positive");
  if (forces.size() != size_t(rows) * cols)
    throw std::invalid_argument("TaxelFrame: grid length does not match rows*cols");
  for (double v : forces)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("TaxelFrame: forces must be finite and non-negative");
}

void TaxelTrial::validate() const {
  if (sample_rate <= 0.0)
    throw std::invalid_argument("TaxelTrial: sample_rate must be positive");
  for (const TaxelFrame& f : frames) {
    f.validate();
    if (f.rows != frames.front().rows || f.cols != frames.front().cols)
      throw std::invalid_argument("TaxelTrial: frames must share grid dimensions");
  }
  if (!arm_position.empty() && arm_position.size() != frames.size())
    throw std::invalid_argument("TaxelTrial: arm_position length must match frame count");
}

int BinaryMask::count() const {
  int n = 0;
  for (uint8_t b : bits) n += (b != 0);
  return n;
}

BinaryMask threshold_frame(const TaxelFrame& frame, double tau) {
  BinaryMask mask;
  mask.rows = frame.rows;
  mask.cols = frame.cols;
  mask.bits.resize(frame.forces.size());
  for (size_t i = 0; i < frame.forces.size(); ++i)
    mask.bits[i] = frame.forces[i] > tau ? 1 : 0;
  return mask;
}

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity conn) {
  const int rows = mask.rows, cols = mask.cols;
  std::vector<int> label(size_t(rows) * cols, -1);
  std::vector<Component> out;

  static constexpr int dr4[] = {-1, 1, 0, 0};
  static constexpr int dc4[] = {0, 0, -1, 1};
  static constexpr int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static constexpr int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
  const int* dr = conn == Connectivity::Four ? dr4 : dr8;
  const int* dc = conn == Connectivity::Four ? dc4 : dc8;
  const int ndirs = conn == Connectivity::Four ? 4 : 8;

  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!mask.at(r, c) || label[size_t(r) * cols + c] >= 0) continue;
      Component comp;
      const int id = int(out.size());
      stack.push_back({r, c});
      label[size_t(r) * cols + c] = id;
      while (!stack.empty()) {
        auto [cr, cc] = stack.back();
        stack.pop_back();
        comp.taxels.push_back({cr, cc});
        for (int k = 0; k < ndirs; ++k) {
          const int nr = cr + dr[k], nc = cc + dc[k];
          if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
          if (!mask.at(nr, nc) || label[size_t(nr) * cols + nc] >= 0) continue;
          label[size_t(nr) * cols + nc] = id;
          stack.push_back({nr, nc});
        }
      }
      std::sort(comp.taxels.begin(), comp.taxels.end());
      comp.area = int(comp.taxels.size());
      double sr = 0.0, sc = 0.0;
      for (auto& [tr, tc] : comp.taxels) {
        sr += tr;
        sc += tc;
      }
      comp.centroid_row = sr / comp.area;
      comp.centroid_col = sc / comp.area;
      out.push_back(std::move(comp));
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    if (a.area != b.area) return a.area > b.area;
    return a.min_index() < b.min_index();
  });
  return out;
}

std::optional<Component> largest_component(const std::vector<Component>& components) {
  if (components.empty()) return std::nullopt;
  return components.front();
}

TaxelFrame pool_frame(const TaxelFrame& frame, int factor) {
  if (factor == kPoolFull) {
    TaxelFrame out;
    out.rows = 1;
    out.cols = 1;
    out.taxel_pitch = frame.taxel_pitch * std::sqrt(double(frame.rows) * frame.cols);
    out.forces.assign(1, frame.total_force());
    return out;
  }
  if (factor < 2)
    throw NonDivisibleGrid("pool_frame: factor must be >= 2 or kPoolFull");
  if (frame.rows % factor != 0 || frame.cols % factor != 0)
    throw NonDivisibleGrid("pool_frame: grid " + std::to_string(frame.rows) + "x" +
                           std::to_string(frame.cols) + " not divisible by factor " +
                           std::to_string(factor));
  TaxelFrame out = TaxelFrame::zeros(frame.rows / factor, frame.cols / factor,
                                     frame.taxel_pitch * factor);
  for (int r = 0; r < frame.rows; ++r)
    for (int c = 0; c < frame.cols; ++c)
      out.at(r / factor, c / factor) += frame.at(r, c);
  return out;
}

TaxelTrial pool_trial(const TaxelTrial& trial, int factor) {
  if (factor == 1) return trial;
  TaxelTrial out = trial;
  for (TaxelFrame& f : out.frames) f = pool_frame(f, factor);
  return out;
}

double resolution_taxels_per_cm2(int factor, double base_pitch) {
  // The ladder divides density by 4 per rung; the whole-grid collapse is
  // reported as the next rung down (the 24x16 sensor's ladder ends 6 -> 1).
  const double pitch_cm = base_pitch * 100.0;
  const double eff = factor == kPoolFull ? 16.0 : double(factor);
  return 1.0 / (pitch_cm * eff * pitch_cm * eff);
}

// --- trial file I/O ---

void write_trial(const TaxelTrial& trial, const std::string& path) {
  trial.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for write: " + path);
  const TaxelFrame& f0 = trial.frames.empty() ? TaxelFrame{} : trial.frames.front();
  out << f0.rows << ',' << f0.cols << ',' << format_double(trial.sample_rate) << ','
      << format_double(trial.contact_threshold) << ','
      << (trial.label ? to_string(*trial.label) : "unknown") << ','
      << to_string(trial.condition.velocity) << ',' << to_string(trial.condition.stiffness)
      << '\n';
  for (const TaxelFrame& f : trial.frames) {
    for (size_t i = 0; i < f.forces.size(); ++i) {
      if (i) out << ',';
      out << format_double(f.forces[i]);
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
  if (!trial.arm_position.empty()) {
    std::ofstream arm(path + ".arm");
    if (!arm) throw FormatError("cannot open for write: " + path + ".arm");
    for (double x : trial.arm_position) arm << format_double(x) << '\n';
  }
}

TaxelTrial read_trial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open trial file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty trial file: " + path);
  const auto head = split(trim(line), ',');
  if (head.size() != 7)
    throw FormatError("trial header needs 7 fields, got " + std::to_string(head.size()) +
                      " in " + path);
  TaxelTrial trial;
  const int rows = int(parse_double(head[0], "rows"));
  const int cols = int(parse_double(head[1], "cols"));
  trial.sample_rate = parse_double(head[2], "sample_rate");
  trial.contact_threshold = parse_double(head[3], "contact_threshold");
  trial.label = parse_label(head[4]);
  trial.condition.velocity = parse_setting(head[5]);
  trial.condition.stiffness = parse_setting(head[6]);

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != size_t(rows) * cols)
      throw FormatError("frame line has " + std::to_string(cells.size()) + " values, want " +
                        std::to_string(size_t(rows) * cols) + " in " + path);
    TaxelFrame f = TaxelFrame::zeros(rows, cols);
    for (size_t i = 0; i < cells.size(); ++i) f.forces[i] = parse_double(cells[i], "force");
    trial.frames.push_back(std::move(f));
  }

  std::ifstream arm(path + ".arm");
  if (arm) {
    while (std::getline(arm, line)) {
      line = trim(line);
      if (!line.empty()) trial.arm_position.push_back(parse_double(line, "arm position"));
    }
  }
  trial.validate();
  return trial;
}

}  // namespace tactile
