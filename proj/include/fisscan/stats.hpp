#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fisscan/field.hpp"
#include "fisscan/geometry.hpp"

namespace fisscan {

enum class StatKind { F1, F2, NB, FnB1, FnB2 };

const char* stat_name(StatKind kind);
StatKind parse_stat(const std::string& name);

// Where the scale sigma comes from: fixed and known, or re-estimated from the
// image by the global interquartile-range rule.
struct SigmaSource {
  enum class Mode { Known, SilvermanGlobal };
  Mode mode = Mode::SilvermanGlobal;
  double value = 1.0;  // used when mode == Known

  static SigmaSource known(double sigma) { return {Mode::Known, sigma}; }
  static SigmaSource silverman() { return {Mode::SilvermanGlobal, 0.0}; }
  std::string tag() const;
  static SigmaSource parse(const std::string& tag);
};

struct StatConfig {
  StatKind kind = StatKind::FnB1;
  WindowSpec window;
  std::vector<double> angles{0.0};  // strictly increasing, in [0, pi)
  SigmaSource sigma;

  void validate() const;
};

// Equidistant angles i * pi/P for i = 0..P-1, in radians.
std::vector<double> equidistant_angles(int count);

// Statistic values on the valid anchor rectangle; NaN everywhere else.
struct HeatMap {
  int size = 0;
  AnchorRect anchors;
  std::vector<double> values;  // T x T row-major

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row - 1) * size + (col - 1)];
  }
  bool valid_at(int row, int col) const;
  double max_value() const;  // over valid anchors
};

// Boolean mask over the anchor rectangle.
struct BoolMask {
  int size = 0;
  AnchorRect anchors;
  std::vector<std::uint8_t> values;  // T x T row-major

  bool at(int row, int col) const {
    return values[static_cast<std::size_t>(row - 1) * size + (col - 1)] != 0;
  }
  void set(int row, int col, bool v) {
    values[static_cast<std::size_t>(row - 1) * size + (col - 1)] = v ? 1 : 0;
  }
  long long count_set() const;
};

struct SigmaEstimate {
  double value = 0.0;
  bool degenerate = false;  // constant image, estimate collapsed to zero
  std::string method;
  std::size_t sample_size = 0;
};

// Outer-minus-inner and half-disk mean contrasts at one anchor and angle.
struct Contrasts {
  double upper_minus_inner = 0.0;
  double lower_minus_inner = 0.0;
  double half_contrast = 0.0;
};

// Scan masks for one statistic configuration at a fixed resolution. Masks are
// built once per (segment, angle) and shared read-only, so heat maps can be
// evaluated in parallel over anchors.
class ScanEngine {
 public:
  ScanEngine(const StatConfig& config, int T);

  const StatConfig& config() const { return config_; }
  int resolution() const { return size_; }
  const AnchorRect& anchors() const { return anchors_; }

  double stat_at(const GrayField& field, double sigma, int row, int col) const;
  Contrasts contrasts_at(const GrayField& field, int angle_index, int row, int col) const;

  HeatMap heatmap(const GrayField& field, double sigma, int threads = 1) const;
  double max_over_anchors(const GrayField& field, double sigma, int threads = 1) const;

  // Window pixels at an anchor: union of all masks in use, translated.
  std::vector<std::pair<int, int>> window_pixels(int row, int col) const;
  const std::vector<OffsetMask>& masks() const { return masks_; }

  bool uses_contrast_part() const { return needs_f_; }
  bool uses_half_part() const { return needs_nb_; }

 private:
  struct AngleMasks {
    // Indices into masks_; -1 when the segment is not needed.
    int inner = -1;
    int upper = -1;
    int lower = -1;
    int half_pos = -1;
    int half_neg = -1;
  };

  double masked_mean_scaled(const GrayField& field, int mask_index, int row, int col) const;

  StatConfig config_;
  int size_ = 0;
  bool needs_f_ = false;
  bool needs_nb_ = false;
  std::vector<OffsetMask> masks_;
  std::vector<std::vector<long long>> linear_offsets_;  // per mask, row-major steps
  std::vector<AngleMasks> per_angle_;
  AnchorRect anchors_;
};

// Sum of field values over the translated mask. Throws std::out_of_range when
// part of the window leaves the image.
double local_sum(const GrayField& field, const OffsetMask& mask, int row, int col);

// (T / count) * local_sum: the rescaled sample mean over the window.
double local_mean_scaled(const GrayField& field, const OffsetMask& mask, int row, int col);

// One-call conveniences over a throwaway engine.
double stat_at(const GrayField& field, const StatConfig& config, double sigma,
               int row, int col);
HeatMap heatmap(const GrayField& field, const StatConfig& config, double sigma,
                int threads = 1);

// Robust scale estimate: interquartile range of all pixels divided by the
// normal-reference constant. Quantiles interpolate linearly between order
// statistics at zero-based position p*(n-1).
SigmaEstimate silverman_sigma(const GrayField& field);

// Population limit of the estimate for a given marginal distribution:
// (q(0.75) - q(0.25)) / kNormalIqr using analytic quantiles. Centering shifts
// both quartiles equally, so uncentered quantiles give the same value.
double silverman_limit(const NoiseModel& model);

BoolMask significance_mask(const HeatMap& hm, double beta);

// Linear-interpolation quantile of a sorted sample.
double interpolated_quantile(const std::vector<double>& sorted, double p);

// Resolves sigma for one field under the given source.
SigmaEstimate resolve_sigma(const GrayField& field, const SigmaSource& source);

}  // namespace fisscan
