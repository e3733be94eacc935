#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fisscan/calibrate.hpp"
#include "fisscan/errors.hpp"
#include "fisscan/experiments.hpp"

using namespace fisscan;

namespace {

ThresholdRecord explicit_threshold(double beta, const WindowSpec& w, int T,
                                   StatKind stat = StatKind::FnB1) {
  ThresholdRecord r;
  r.beta = beta;
  r.stat = stat;
  r.d = w.d;
  r.h = w.h;
  r.T = T;
  r.level = 0.95;
  r.replicates = 0;
  return r;
}

}  // namespace

TEST_CASE("wilson interval") {
  const WilsonInterval zero = wilson_interval(0, 100);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi < 0.05);
  const WilsonInterval half = wilson_interval(50, 100);
  CHECK(half.lo < 0.5);
  CHECK(half.hi > 0.5);
  CHECK(half.hi - half.lo < 0.25);
  const WilsonInterval all = wilson_interval(100, 100);
  CHECK(all.hi == 1.0);
  CHECK(all.lo > 0.95);
}

TEST_CASE("fp study trivial threshold and config checks") {
  const WindowSpec w{0.2, 0.06};
  FpStudyRequest req;
  req.config.kind = StatKind::FnB1;
  req.config.window = w;
  req.config.angles = {0.0};
  req.config.sigma = SigmaSource::silverman();
  req.T = 50;
  req.replicates = 20;
  req.noise = NoiseModel::gaussian(1.0);
  req.seed = 7;
  req.threshold = explicit_threshold(1e9, w, 50);
  const StudyRow row = fp_rate_study(req, 2);
  CHECK(row.rate == 0.0);
  CHECK(row.interval.lo == 0.0);

  req.threshold = explicit_threshold(5.0, WindowSpec{0.3, 0.06}, 50);
  CHECK_THROWS_AS(fp_rate_study(req, 1), ConfigError);
}

TEST_CASE("detection with an overwhelming signal") {
  const WindowSpec w{0.2, 0.06};
  DetectionScenario scenario;
  scenario.T = 60;
  scenario.window = w;
  scenario.fissure.center = {0.5, 0.5};
  scenario.fissure.length = 0.5;
  scenario.fissure.width = 0.04;
  scenario.fissure.angle = 0.0;
  scenario.fissure.amplitude = 10.0;
  scenario.stat = StatKind::FnB1;
  scenario.sigma = SigmaSource::known(1.0);
  scenario.threshold = explicit_threshold(8.0, w, 60);
  scenario.replicates = 20;
  scenario.seed = 3;

  std::vector<std::uint8_t> detected;
  const double rate = detection_rate(scenario, &detected, 2);
  CHECK(rate == 1.0);
  CHECK(detected.size() == 20);

  // Null case with an unreachable threshold.
  scenario.fissure.amplitude = 0.001;
  scenario.threshold = explicit_threshold(1e9, w, 60);
  CHECK(detection_rate(scenario, nullptr, 2) == 0.0);
}

TEST_CASE("detection is monotone in the signal with common random numbers") {
  const WindowSpec w{0.2, 0.06};
  DetectionScenario scenario;
  scenario.T = 60;
  scenario.window = w;
  scenario.fissure.center = {0.5, 0.5};
  scenario.fissure.length = 0.5;
  scenario.fissure.width = 0.04;
  scenario.fissure.angle = 0.0;
  scenario.stat = StatKind::F1;
  scenario.sigma = SigmaSource::known(1.0);
  scenario.threshold = explicit_threshold(6.0, w, 60);
  scenario.replicates = 40;
  scenario.seed = 11;

  std::vector<std::uint8_t> weak, strong;
  scenario.fissure.amplitude = 0.7;
  detection_rate(scenario, &weak, 2);
  scenario.fissure.amplitude = 1.4;
  detection_rate(scenario, &strong, 2);
  for (std::size_t i = 0; i < weak.size(); ++i) {
    CHECK(strong[i] >= weak[i]);  // per-replicate indicators, paired noise
  }
}

TEST_CASE("min angles rule") {
  StudyTable table;
  auto add = [&table](double w, double delta, double offset, double rate) {
    StudyRow row;
    row.params = {{"w", w}, {"delta", delta}, {"offset_deg", offset}};
    row.rate = rate;
    row.replicates = 100;
    table.rows.push_back(row);
  };
  for (double offset : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0}) add(0.01, 3.0, offset, 0.9);
  add(0.01, 1.5, 0.0, 0.9);
  add(0.01, 1.5, 5.0, 0.8);
  add(0.01, 1.5, 10.0, 0.5);
  add(0.02, 0.5, 0.0, 0.2);
  add(0.03, 2.0, 0.0, 0.99);
  add(0.03, 2.0, 90.0, 0.8);

  const auto rules = min_angles_for_target(table, 0.75);
  REQUIRE(rules.size() == 4);
  CHECK(rules[0].delta_max_deg == 25.0);
  CHECK(rules[0].min_angles == 4);
  CHECK(rules[1].delta_max_deg == 5.0);
  CHECK(rules[1].min_angles == 18);
  CHECK_FALSE(rules[2].attainable);
  CHECK(rules[3].delta_max_deg == 90.0);
  CHECK(rules[3].min_angles == 1);
}

TEST_CASE("fast scan equals the full scan without filters") {
  const WindowSpec w{0.2, 0.06};
  const int T = 60;
  GrayField field = generate_noise(NoiseModel::gaussian(1.0), T, 17);
  // Plant a fissure so the masks are nonempty.
  SignalSpec signal;
  signal.anomaly = RectAnomaly{{0.5, 0.5}, 0.5, 0.04, 0.0, 3.0};
  field = inject_anomaly(field, signal);

  FastScanRequest req;
  req.window = w;
  req.angles_stage1 = {0.0, 1.0};
  req.angles_stage2 = {0.0, 1.0};
  req.darkness_quantile = 1.0;
  req.beta_liberal = -std::numeric_limits<double>::infinity();
  req.beta_conservative = 4.0;
  req.sigma = SigmaSource::silverman();

  const FastScanResult fast = fast_scan(field, req, 2);
  CHECK(fast.final_significant > 0);

  StatConfig full_cfg{StatKind::FnB1, w, req.angles_stage2, req.sigma};
  const ScanEngine full(full_cfg, T);
  const SigmaEstimate sigma = resolve_sigma(field, req.sigma);
  const HeatMap hm = full.heatmap(field, sigma.value, 2);
  const BoolMask full_mask = significance_mask(hm, req.beta_conservative);

  REQUIRE(fast.final_mask.values.size() == full_mask.values.size());
  CHECK(fast.final_mask.values == full_mask.values);
  CHECK(fast.evaluations <= fast.full_scan_evaluations);

  // A liberal threshold above -inf can only shrink the mask.
  req.beta_liberal = 2.0;
  const FastScanResult pruned = fast_scan(field, req, 2);
  for (std::size_t i = 0; i < full_mask.values.size(); ++i) {
    CHECK(pruned.final_mask.values[i] <= full_mask.values[i]);
  }

  // Zero darkness quantile: no candidates, empty mask.
  req.darkness_quantile = 0.0;
  const FastScanResult empty = fast_scan(field, req, 2);
  CHECK(empty.empty_candidates);
  CHECK(empty.final_mask.count_set() == 0);
  CHECK(empty.candidate_count == 0);
}
