#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fisscan/calibrate.hpp"
#include "fisscan/field.hpp"
#include "fisscan/stats.hpp"

namespace fisscan {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(long long successes, long long trials,
                               double z = 1.959963984540054);

// One study cell: named parameters, the observed rate and its interval.
struct StudyRow {
  std::vector<std::pair<std::string, double>> params;
  double rate = 0.0;
  int replicates = 0;
  WilsonInterval interval;

  double param(const std::string& name) const;
};

struct StudyTable {
  std::vector<StudyRow> rows;

  std::string to_csv() const;
};

struct FpStudyRequest {
  StatConfig config;  // evaluation statistic; may use more angles than calibration
  ThresholdRecord threshold;
  int T = 100;
  int replicates = 1000;
  NoiseModel noise;
  std::uint64_t seed = 1;
};

// Fraction of null images whose heat-map maximum reaches the threshold. An
// image counts as a false positive as soon as one anchor is significant.
StudyRow fp_rate_study(const FpStudyRequest& request, int threads = 1);

// One misspecification cell: a fissure of given width/depth at its true
// angle, scanned with a single angle offset by `angle_offset_deg` degrees.
struct DetectionScenario {
  int T = 100;
  RectAnomaly fissure;  // width, amplitude and true angle of the simulated fissure
  double baseline = 0.0;
  double angle_offset_deg = 0.0;  // in [0, 90]
  StatKind stat = StatKind::FnB1;
  WindowSpec window;
  SigmaSource sigma;
  ThresholdRecord threshold;
  int replicates = 300;
  std::uint64_t seed = 1;
};

// A replicate counts as detected when at least one significant anchor has a
// window pixel set that intersects the fissure pixel set. Per-replicate
// indicators are returned for paired-seed comparisons.
double detection_rate(const DetectionScenario& scenario,
                      std::vector<std::uint8_t>* detected_out = nullptr,
                      int threads = 1);

struct DetectionGrid {
  int T = 100;
  WindowSpec window;
  double fissure_length = 0.6;
  double fissure_angle = 0.0;  // radians
  Vec2 fissure_center{0.5, 0.5};
  double baseline = 0.0;
  std::vector<double> widths{0.02};
  std::vector<double> amplitudes{1.5};
  std::vector<double> angle_offsets_deg{0, 5, 10, 15, 20, 25};
  StatKind stat = StatKind::FnB1;
  SigmaSource sigma;
  ThresholdRecord threshold;
  int replicates = 300;
  std::uint64_t seed = 1;  // shared across cells: common random numbers
};

StudyTable detection_rate_study(const DetectionGrid& grid, int threads = 1);

// Largest studied misspecification that still meets the target rate, and the
// number of equidistant angles that guarantees it.
struct AngleRule {
  double width = 0.0;
  double amplitude = 0.0;
  double delta_max_deg = 0.0;
  int min_angles = 0;
  bool attainable = false;
};

std::vector<AngleRule> min_angles_for_target(const StudyTable& detection_table,
                                             double target = 0.75);

// Two-stage scan: restrict to dark anchor pixels, filter with a cheap
// one-sided statistic against a liberal threshold, re-scan survivors with the
// full angle set, then subtract the half-disk statistic.
struct FastScanRequest {
  WindowSpec window;
  std::vector<double> angles_stage1{0.0};
  std::vector<double> angles_stage2{0.0};
  double darkness_quantile = 0.1;  // 1.0 disables the darkness filter
  double beta_liberal = 0.0;
  double beta_conservative = 0.0;
  SigmaSource sigma;
};

struct FastScanResult {
  BoolMask final_mask;
  double sigma = 0.0;
  long long candidate_count = 0;
  long long stage1_survivors = 0;
  long long stage2_survivors = 0;
  long long final_significant = 0;
  long long evaluations = 0;  // segment sums actually computed
  long long full_scan_evaluations = 0;
  bool empty_candidates = false;
};

FastScanResult fast_scan(const GrayField& field, const FastScanRequest& request,
                         int threads = 1);

}  // namespace fisscan
