#include "fisscan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "fisscan/errors.hpp"
#include "fisscan/parallel.hpp"

namespace fisscan {

WilsonInterval wilson_interval(long long successes, long long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval interval{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) interval.lo = 0.0;
  if (successes == trials) interval.hi = 1.0;
  return interval;
}

double StudyRow::param(const std::string& name) const {
  for (const auto& [key, value] : params) {
    if (key == name) return value;
  }
  throw ConfigError("study row has no parameter " + name);
}

std::string StudyTable::to_csv() const {
  std::ostringstream os;
  if (rows.empty()) return "";
  for (const auto& [key, value] : rows.front().params) os << key << ',';
  os << "rate,replicates,wilson_lo,wilson_hi\n";
  for (const auto& row : rows) {
    for (const auto& [key, value] : row.params) os << value << ',';
    os << row.rate << ',' << row.replicates << ',' << row.interval.lo << ','
       << row.interval.hi << '\n';
  }
  return os.str();
}

namespace {

void check_threshold_compatible(const ThresholdRecord& threshold, const WindowSpec& w,
                                int T) {
  if (threshold.d != w.d || threshold.h != w.h || threshold.T != T) {
    throw ConfigError("threshold record calibrated for different (d, h, T)");
  }
}

}  // namespace

StudyRow fp_rate_study(const FpStudyRequest& request, int threads) {
  check_threshold_compatible(request.threshold, request.config.window, request.T);
  const ScanEngine engine(request.config, request.T);
  std::vector<std::uint8_t> positive(request.replicates, 0);
  parallel_for(request.replicates, threads, [&](std::int64_t r) {
    const GrayField field =
        generate_noise(request.noise, request.T, request.seed, static_cast<std::uint64_t>(r));
    const SigmaEstimate sigma = resolve_sigma(field, request.config.sigma);
    if (sigma.degenerate) return;  // cannot happen for continuous noise
    const double max_stat = engine.max_over_anchors(field, sigma.value, 1);
    positive[r] = max_stat >= request.threshold.beta ? 1 : 0;
  });
  long long hits = 0;
  for (auto v : positive) hits += v;
  StudyRow row;
  row.params = {{"P", static_cast<double>(request.config.angles.size())},
                {"T", static_cast<double>(request.T)},
                {"level", request.threshold.level},
                {"beta", request.threshold.beta}};
  row.replicates = request.replicates;
  row.rate = static_cast<double>(hits) / request.replicates;
  row.interval = wilson_interval(hits, request.replicates);
  return row;
}

namespace {

double wrap_angle(double angle) {
  const double pi = std::numbers::pi;
  double a = std::fmod(angle, pi);
  if (a < 0.0) a += pi;
  return a;
}

// Anchors whose window pixel set intersects the fissure pixel set: the
// fissure indicator dilated by the (symmetric) window offsets.
std::vector<std::uint8_t> dilate_by_window(const std::vector<std::pair<int, int>>& pixels,
                                           const ScanEngine& engine, int T) {
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(T) * T, 0);
  for (const OffsetMask& m : engine.masks()) {
    for (const Offset& o : m.offsets) {
      for (const auto& [pr, pc] : pixels) {
        const int r = pr - o.dr;
        const int c = pc - o.dc;
        if (r >= 1 && r <= T && c >= 1 && c <= T) {
          hit[static_cast<std::size_t>(r - 1) * T + (c - 1)] = 1;
        }
      }
    }
  }
  return hit;
}

}  // namespace

double detection_rate(const DetectionScenario& scenario,
                      std::vector<std::uint8_t>* detected_out, int threads) {
  check_threshold_compatible(scenario.threshold, scenario.window, scenario.T);
  StatConfig config;
  config.kind = scenario.stat;
  config.window = scenario.window;
  config.angles = {wrap_angle(scenario.fissure.angle +
                              scenario.angle_offset_deg * std::numbers::pi / 180.0)};
  config.sigma = scenario.sigma;
  const ScanEngine engine(config, scenario.T);

  const auto fissure_px = anomaly_pixels(scenario.fissure, scenario.T);
  if (fissure_px.empty()) throw ConfigError("fissure rasterizes to no pixels");
  const auto near_fissure = dilate_by_window(fissure_px, engine, scenario.T);

  SignalSpec signal;
  signal.baseline = scenario.baseline;
  signal.anomaly = scenario.fissure;

  const AnchorRect anchors = engine.anchors();
  std::vector<std::uint8_t> detected(scenario.replicates, 0);
  parallel_for(scenario.replicates, threads, [&](std::int64_t r) {
    const GrayField noise = generate_noise(NoiseModel::gaussian(1.0), scenario.T,
                                           scenario.seed, static_cast<std::uint64_t>(r));
    const GrayField field = inject_anomaly(noise, signal);
    const SigmaEstimate sigma = resolve_sigma(field, scenario.sigma);
    if (sigma.degenerate) return;
    for (int row = anchors.row_lo; row <= anchors.row_hi && !detected[r]; ++row) {
      const std::uint8_t* hit =
          near_fissure.data() + static_cast<std::size_t>(row - 1) * scenario.T;
      for (int col = anchors.col_lo; col <= anchors.col_hi; ++col) {
        if (!hit[col - 1]) continue;
        if (engine.stat_at(field, sigma.value, row, col) >= scenario.threshold.beta) {
          detected[r] = 1;
          break;
        }
      }
    }
  });
  long long hits = 0;
  for (auto v : detected) hits += v;
  if (detected_out) *detected_out = std::move(detected);
  return static_cast<double>(hits) / scenario.replicates;
}

StudyTable detection_rate_study(const DetectionGrid& grid, int threads) {
  StudyTable table;
  for (double width : grid.widths) {
    for (double amplitude : grid.amplitudes) {
      for (double offset : grid.angle_offsets_deg) {
        DetectionScenario scenario;
        scenario.T = grid.T;
        scenario.window = grid.window;
        scenario.fissure.center = grid.fissure_center;
        scenario.fissure.length = grid.fissure_length;
        scenario.fissure.width = width;
        scenario.fissure.angle = grid.fissure_angle;
        scenario.fissure.amplitude = amplitude;
        scenario.baseline = grid.baseline;
        scenario.angle_offset_deg = offset;
        scenario.stat = grid.stat;
        scenario.sigma = grid.sigma;
        scenario.threshold = grid.threshold;
        scenario.replicates = grid.replicates;
        scenario.seed = grid.seed;
        const double rate = detection_rate(scenario, nullptr, threads);
        StudyRow row;
        row.params = {{"w", width}, {"delta", amplitude}, {"offset_deg", offset}};
        row.replicates = grid.replicates;
        row.rate = rate;
        const long long hits = std::llround(rate * grid.replicates);
        row.interval = wilson_interval(hits, grid.replicates);
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

std::vector<AngleRule> min_angles_for_target(const StudyTable& detection_table,
                                             double target) {
  std::vector<AngleRule> rules;
  for (const auto& row : detection_table.rows) {
    const double w = row.param("w");
    const double a = row.param("delta");
    const double offset = row.param("offset_deg");
    AngleRule* rule = nullptr;
    for (auto& existing : rules) {
      if (existing.width == w && existing.amplitude == a) {
        rule = &existing;
        break;
      }
    }
    if (!rule) {
      rules.push_back(AngleRule{w, a, 0.0, 0, false});
      rule = &rules.back();
    }
    if (row.rate >= target && offset > rule->delta_max_deg) {
      rule->delta_max_deg = offset;
    }
  }
  for (auto& rule : rules) {
    // A zero tolerance cannot be guaranteed by finitely many angles.
    rule.attainable = rule.delta_max_deg > 0.0;
    rule.min_angles =
        rule.attainable ? static_cast<int>(std::ceil(90.0 / rule.delta_max_deg)) : 0;
  }
  return rules;
}

FastScanResult fast_scan(const GrayField& field, const FastScanRequest& request,
                         int threads) {
  const int T = field.size();
  StatConfig f1_stage1{StatKind::F1, request.window, request.angles_stage1,
                       request.sigma};
  StatConfig nb_stage{StatKind::NB, request.window, request.angles_stage2,
                      request.sigma};
  const ScanEngine engine1(f1_stage1, T);
  const ScanEngine engine_nb(nb_stage, T);

  // The one-sided statistic is a maximum over angles, so when the stage-1
  // angles are contained in the stage-2 set only the extra angles need a
  // second pass; otherwise stage 2 recomputes the full set.
  std::vector<double> extra_angles;
  bool stage1_reusable = true;
  for (double a : request.angles_stage1) {
    bool found = false;
    for (double b : request.angles_stage2) found = found || a == b;
    stage1_reusable = stage1_reusable && found;
  }
  if (stage1_reusable) {
    for (double b : request.angles_stage2) {
      bool in_stage1 = false;
      for (double a : request.angles_stage1) in_stage1 = in_stage1 || a == b;
      if (!in_stage1) extra_angles.push_back(b);
    }
  } else {
    extra_angles = request.angles_stage2;
  }
  std::unique_ptr<ScanEngine> engine_extra;
  if (!extra_angles.empty()) {
    StatConfig extra_cfg{StatKind::F1, request.window, extra_angles, request.sigma};
    engine_extra = std::make_unique<ScanEngine>(extra_cfg, T);
  }

  // Shared anchor rectangle so every stage evaluates the same anchor set.
  std::vector<const OffsetMask*> all_masks;
  for (const auto& m : engine1.masks()) all_masks.push_back(&m);
  for (const auto& m : engine_nb.masks()) all_masks.push_back(&m);
  if (engine_extra) {
    for (const auto& m : engine_extra->masks()) all_masks.push_back(&m);
  }
  const AnchorRect anchors =
      valid_anchor_pixels(std::span<const OffsetMask* const>(all_masks), T);

  FastScanResult result;
  result.full_scan_evaluations =
      anchors.count() * 5 * static_cast<long long>(request.angles_stage2.size());

  const SigmaEstimate sigma = resolve_sigma(field, request.sigma);
  result.sigma = sigma.value;
  if (sigma.degenerate) throw DataError("degenerate scale estimate: constant image");

  // Stage 0: darkness filter on the anchor's own gray value. A quantile of
  // 1 or more disables the filter entirely.
  std::vector<std::pair<int, int>> candidates;
  if (request.darkness_quantile >= 1.0) {
    for (int row = anchors.row_lo; row <= anchors.row_hi; ++row) {
      for (int col = anchors.col_lo; col <= anchors.col_hi; ++col) {
        candidates.emplace_back(row, col);
      }
    }
  } else {
    std::vector<double> sorted = field.values();
    std::sort(sorted.begin(), sorted.end());
    const double cutoff = interpolated_quantile(sorted, request.darkness_quantile);
    for (int row = anchors.row_lo; row <= anchors.row_hi; ++row) {
      for (int col = anchors.col_lo; col <= anchors.col_hi; ++col) {
        if (field.at(row, col) < cutoff) candidates.emplace_back(row, col);
      }
    }
  }
  result.candidate_count = static_cast<long long>(candidates.size());
  result.empty_candidates = candidates.empty();

  // Stage 1: cheap one-sided statistic against the liberal threshold.
  std::vector<double> stage1_values(candidates.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(candidates.size()), threads, [&](std::int64_t i) {
    const auto [row, col] = candidates[i];
    stage1_values[i] = engine1.stat_at(field, sigma.value, row, col);
  });
  result.evaluations += static_cast<long long>(candidates.size()) * 3 *
                        static_cast<long long>(request.angles_stage1.size());
  std::vector<std::pair<int, int>> survivors1;
  std::vector<double> carried;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (stage1_values[i] >= request.beta_liberal) {
      survivors1.push_back(candidates[i]);
      carried.push_back(stage1_values[i]);
    }
  }
  result.stage1_survivors = static_cast<long long>(survivors1.size());

  // Stage 2: full angle set against the conservative threshold.
  std::vector<double> f1_values(survivors1.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(survivors1.size()), threads, [&](std::int64_t i) {
    const auto [row, col] = survivors1[i];
    const double extra =
        engine_extra ? engine_extra->stat_at(field, sigma.value, row, col)
                     : -std::numeric_limits<double>::infinity();
    f1_values[i] = stage1_reusable ? std::max(carried[i], extra) : extra;
  });
  result.evaluations += static_cast<long long>(survivors1.size()) * 3 *
                        static_cast<long long>(extra_angles.size());
  std::vector<std::pair<int, int>> survivors2;
  std::vector<double> f1_kept;
  for (std::size_t i = 0; i < survivors1.size(); ++i) {
    if (f1_values[i] >= request.beta_conservative) {
      survivors2.push_back(survivors1[i]);
      f1_kept.push_back(f1_values[i]);
    }
  }
  result.stage2_survivors = static_cast<long long>(survivors2.size());

  // Stage 3: subtract the half-disk statistic; the stage-2 values are reused
  // since both stages share the same angle set.
  result.final_mask.size = T;
  result.final_mask.anchors = anchors;
  result.final_mask.values.assign(static_cast<std::size_t>(T) * T, 0);
  std::vector<std::uint8_t> keep3(survivors2.size(), 0);
  parallel_for(static_cast<std::int64_t>(survivors2.size()), threads, [&](std::int64_t i) {
    const auto [row, col] = survivors2[i];
    const double nb = engine_nb.stat_at(field, sigma.value, row, col);
    const double fnb1 = std::max(f1_kept[i] - nb, 0.0);
    keep3[i] = fnb1 >= request.beta_conservative;
  });
  result.evaluations += static_cast<long long>(survivors2.size()) * 2 *
                        static_cast<long long>(request.angles_stage2.size());
  for (std::size_t i = 0; i < survivors2.size(); ++i) {
    if (keep3[i]) {
      result.final_mask.set(survivors2[i].first, survivors2[i].second, true);
      ++result.final_significant;
    }
  }
  return result;
}

}  // namespace fisscan
