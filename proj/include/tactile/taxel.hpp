#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tactile {

// The four object categories, in the fixed tie-break order used everywhere.
enum class Category { RigidFixed = 0, RigidMovable = 1, SoftFixed = 2, SoftMovable = 3 };
inline constexpr int kNumCategories = 4;

const char* to_string(Category c);
// "RF"/"RM"/"SF"/"SM" -> category, "unknown" -> nullopt, anything else throws.
std::optional<Category> parse_label(const std::string& token);

enum class Setting { None = 0, Low = 1, High = 2 };
const char* to_string(Setting s);
Setting parse_setting(const std::string& token);

// Robot configuration a trial was recorded under (velocity x stiffness).
struct Condition {
  Setting velocity = Setting::None;
  Setting stiffness = Setting::None;
  bool operator==(const Condition&) const = default;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonDivisibleGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One time-stamped snapshot of the force-sensing array, row-major.
struct TaxelFrame {
  int rows = 24;
  int cols = 16;
  double taxel_pitch = 0.009;  // m
  std::vector<double> forces;  // rows*cols, N, all >= 0 and finite

  static TaxelFrame zeros(int rows, int cols, double pitch = 0.009);

  double& at(int r, int c) { return forces[size_t(r) * cols + c]; }
  double at(int r, int c) const { return forces[size_t(r) * cols + c]; }
  double max_force() const;
  double total_force() const;
  void validate() const;
};

// A recorded (or simulated) contact episode.
struct TaxelTrial {
  std::vector<TaxelFrame> frames;
  double sample_rate = 100.0;      // Hz
  double contact_threshold = 0.5;  // N, per-trial onset/segmentation threshold
  std::optional<Category> label;
  Condition condition;
  // Arm translation per frame (m), along the column axis of the grid.
  // Empty when unavailable; persisted as a sidecar file next to the trial.
  std::vector<double> arm_position;

  void validate() const;
};

struct BinaryMask {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> bits;  // rows*cols

  bool at(int r, int c) const { return bits[size_t(r) * cols + c] != 0; }
  int count() const;
};

// A maximal connected region of set mask bits.
struct Component {
  std::vector<std::pair<int, int>> taxels;  // sorted (row, col)
  int area = 0;
  double centroid_row = 0.0;
  double centroid_col = 0.0;

  std::pair<int, int> min_index() const { return taxels.front(); }
};

enum class Connectivity { Four, Eight };

// bit(r,c) = forces(r,c) > tau, strict
BinaryMask threshold_frame(const TaxelFrame& frame, double tau);

// Components of the set bits, sorted by area descending, ties broken by the
// smallest member index. Deterministic for a given mask.
std::vector<Component> connected_components(const BinaryMask& mask,
                                            Connectivity conn = Connectivity::Four);

std::optional<Component> largest_component(const std::vector<Component>& components);

// factor == kPoolFull collapses the whole grid into a single taxel.
inline constexpr int kPoolFull = 0;

// Sums factor x factor blocks of raw forces; total force is conserved.
TaxelFrame pool_frame(const TaxelFrame& frame, int factor);
TaxelTrial pool_trial(const TaxelTrial& trial, int factor);

// taxels/cm^2 label for a pooling factor of the 9 mm stock sensor, following
// the successive /4 convention of the resolution ladder (full collapse
// reported as the fifth rung).
double resolution_taxels_per_cm2(int factor, double base_pitch = 0.009);

// --- trial file I/O ---
// Header line: rows,cols,sample_rate,contact_threshold,label,velocity_setting,stiffness_setting
// then one line of rows*cols comma-separated forces per frame.
// Arm positions, when present, go to "<path>.arm", one value per line.
void write_trial(const TaxelTrial& trial, const std::string& path);
TaxelTrial read_trial(const std::string& path);

}  // namespace tactile
