#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fisscan/field.hpp"
#include "fisscan/stats.hpp"

namespace fisscan {

// Calibrated family-wise threshold with full provenance.
struct ThresholdRecord {
  double beta = 0.0;
  StatKind stat = StatKind::FnB1;
  double d = 0.0;
  double h = 0.0;
  int T = 0;
  std::vector<double> calibration_angles;
  double level = 0.95;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::string noise_model;   // NoiseModel tag
  std::string sigma_source;  // SigmaSource tag
  int degenerate_retries = 0;

  bool same_key(const ThresholdRecord& other) const;
};

struct CalibrationRequest {
  StatKind stat = StatKind::FnB1;
  WindowSpec window;
  std::vector<double> calibration_angles{0.0};
  int T = 100;
  double level = 0.95;
  int replicates = 2000;
  NoiseModel noise;
  SigmaSource sigma;
  std::uint64_t seed = 0;
};

// Draws `replicates` null fields, takes the maximum of the statistic over all
// valid anchors of each, and returns the empirical level-quantile of those
// maxima. Sigma is re-estimated per field when the source is Silverman; a
// replicate whose estimate degenerates is retried on a derived sub-stream and
// the retry is counted in the record. Deterministic per seed and independent
// of the number of threads.
ThresholdRecord calibrate_threshold(const CalibrationRequest& request, int threads = 1);

// Per-replicate maxima, exposed for quantile cross-checks.
std::vector<double> calibration_maxima(const CalibrationRequest& request,
                                       int* degenerate_retries, int threads = 1);

// JSON-file-backed store of threshold records. The file holds an array of
// records; the full provenance tuple is the key.
class ThresholdCache {
 public:
  ThresholdCache() = default;

  static ThresholdCache load(const std::string& path);  // missing file -> empty cache
  void save(const std::string& path) const;

  void put(const ThresholdRecord& record);  // replaces an equal-key record
  std::optional<ThresholdRecord> get(const ThresholdRecord& key) const;

  // Convenience lookup on the identifying subset used by the CLI.
  std::optional<ThresholdRecord> find(StatKind stat, double d, double h, int T,
                                      double level) const;

  const std::vector<ThresholdRecord>& records() const { return records_; }

 private:
  std::vector<ThresholdRecord> records_;
};

}  // namespace fisscan
