#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fisscan/calibrate.hpp"
#include "fisscan/errors.hpp"
#include "fisscan/experiments.hpp"
#include "fisscan/field.hpp"
#include "fisscan/image_io.hpp"
#include "fisscan/parallel.hpp"
#include "fisscan/stats.hpp"
#include "fisscan/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace fisscan;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<double> angles_from_flags(const std::string& angles_deg, int num_angles) {
  if (!angles_deg.empty()) {
    std::vector<double> rad;
    for (double deg : parse_number_list(angles_deg)) rad.push_back(deg * kDegToRad);
    return rad;
  }
  return equidistant_angles(num_angles);
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

ordered_json anchor_rect_json(const AnchorRect& rect) {
  return ordered_json{{"rowLo", rect.row_lo},
                      {"rowHi", rect.row_hi},
                      {"colLo", rect.col_lo},
                      {"colHi", rect.col_hi}};
}

ordered_json threshold_json(const ThresholdRecord& r) {
  return ordered_json{{"beta", r.beta},
                      {"stat", stat_name(r.stat)},
                      {"d", r.d},
                      {"h", r.h},
                      {"T", r.T},
                      {"calibrationAngles", r.calibration_angles},
                      {"level", r.level},
                      {"replicates", r.replicates},
                      {"seed", r.seed},
                      {"noiseModel", r.noise_model},
                      {"sigmaSource", r.sigma_source},
                      {"degenerateRetries", r.degenerate_retries}};
}

ordered_json study_row_json(const StudyRow& row) {
  ordered_json j;
  for (const auto& [k, v] : row.params) j[k] = v;
  j["rate"] = row.rate;
  j["replicates"] = row.replicates;
  j["wilsonLo"] = row.interval.lo;
  j["wilsonHi"] = row.interval.hi;
  return j;
}

ordered_json verify_report_json(const VerifyReport& report) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    checks.push_back(ordered_json{{"name", c.name},
                                  {"estimate", c.estimate},
                                  {"target", c.target},
                                  {"tolerance", c.tolerance},
                                  {"ratioCheck", c.ratio_check},
                                  {"pass", c.pass}});
  }
  return ordered_json{{"title", report.title}, {"pass", report.all_pass()}, {"checks", checks}};
}

struct ThresholdFlags {
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string cache_path;
  double level = 0.95;

  // Resolves the threshold for an evaluation at (stat, d, h, T); explicit
  // --beta wins over the cache.
  ThresholdRecord resolve(StatKind stat, const WindowSpec& w, int T) const {
    ThresholdRecord record;
    record.stat = stat;
    record.d = w.d;
    record.h = w.h;
    record.T = T;
    record.level = level;
    if (!std::isnan(beta)) {
      record.beta = beta;
      record.replicates = 0;
      record.noise_model = "explicit";
      record.sigma_source = "explicit";
      return record;
    }
    if (cache_path.empty()) {
      throw ConfigError("no threshold given: pass --beta or --threshold-cache");
    }
    const ThresholdCache cache = ThresholdCache::load(cache_path);
    const auto found = cache.find(stat, w.d, w.h, T, level);
    if (!found) {
      throw ConfigError("threshold cache has no record for this (stat, d, h, T, level)");
    }
    return *found;
  }
};

int cmd_generate(int T, const std::string& noise_tag, std::uint64_t seed, double mu0,
                 double delta, double f_width, double f_length, double f_angle_deg,
                 const std::string& f_center, const std::string& out_dir) {
  const NoiseModel noise = NoiseModel::parse(noise_tag);
  fs::create_directories(out_dir);

  GrayField field = generate_noise(noise, T, seed);
  ordered_json fissure_json;
  long long fissure_pixels = 0;
  SignalSpec signal;
  signal.baseline = mu0;
  if (delta > 0.0) {
    const auto center = parse_number_list(f_center);
    if (center.size() != 2) throw ConfigError("--fissure-center needs \"x,y\"");
    signal.anomaly.center = Vec2{center[0], center[1]};
    signal.anomaly.length = f_length;
    signal.anomaly.width = f_width;
    signal.anomaly.angle = f_angle_deg * kDegToRad;
    signal.anomaly.amplitude = delta;
    field = inject_anomaly(field, signal);
    fissure_pixels = static_cast<long long>(anomaly_pixels(signal.anomaly, T).size());
    fissure_json = ordered_json{{"centerX", center[0]},   {"centerY", center[1]},
                                {"length", f_length},     {"width", f_width},
                                {"angleDeg", f_angle_deg}, {"delta", delta}};
  } else if (mu0 != 0.0) {
    field = inject_anomaly(field, signal);
  }

  ValueMapping mapping;
  const GrayImage image = quantize_field(field, mapping);
  const std::string pgm_path = (fs::path(out_dir) / "field.pgm").string();
  write_pgm16(pgm_path, image);

  ordered_json sidecar;
  sidecar["offset"] = mapping.offset;
  sidecar["scale"] = mapping.scale;
  sidecar["maxval"] = mapping.maxval;
  sidecar["T"] = T;
  // Quantization error of the stored image in its own [0, 1] units; the
  // induced bound on any window contrast is 2*T*pixelError, independent of
  // the number of scan angles.
  sidecar["pixelQuantError"] = 0.5 / mapping.maxval;
  sidecar["contrastQuantBound"] = 2.0 * T * 0.5 / mapping.maxval;
  sidecar["fissure"] = delta > 0.0 ? fissure_json : ordered_json(nullptr);
  sidecar["fissurePixelCount"] = fissure_pixels;
  sidecar["config"] = ordered_json{{"command", "generate"}, {"T", T},
                                   {"noise", noise.tag()},  {"seed", seed},
                                   {"mu0", mu0},            {"delta", delta}};
  write_json((fs::path(out_dir) / "field.json").string(), sidecar);
  std::cout << sidecar.dump(2) << '\n';
  return 0;
}

GrayField load_square_field(const std::string& input) {
  const GrayImage image = read_gray_image(input);
  if (image.width != image.height) {
    throw DataError(input + ": image must be square");
  }
  return field_from_image(image);
}

int cmd_scan(const std::string& input, const std::string& stat, double d, double h,
             const std::string& angles_deg, int num_angles, const std::string& sigma_tag,
             const ThresholdFlags& threshold_flags, const std::string& out_dir,
             int threads) {
  StatConfig config;
  config.kind = parse_stat(stat);
  config.window = WindowSpec{d, h};
  config.angles = angles_from_flags(angles_deg, num_angles);
  config.sigma = SigmaSource::parse(sigma_tag);
  config.validate();

  const GrayField field = load_square_field(input);
  const ThresholdRecord threshold =
      threshold_flags.resolve(config.kind, config.window, field.size());

  const SigmaEstimate sigma = resolve_sigma(field, config.sigma);
  if (sigma.degenerate) throw DataError("degenerate scale estimate: constant image");

  const ScanEngine engine(config, field.size());
  const HeatMap hm = engine.heatmap(field, sigma.value, threads);
  const BoolMask mask = significance_mask(hm, threshold.beta);

  fs::create_directories(out_dir);
  write_heatmap_csv((fs::path(out_dir) / "heatmap.csv").string(), hm);
  const HeatMapImageInfo png_info =
      write_heatmap_png((fs::path(out_dir) / "heatmap.png").string(), hm);
  write_json((fs::path(out_dir) / "heatmap.json").string(),
             ordered_json{{"min", png_info.min},
                          {"max", png_info.max},
                          {"missingValue", png_info.missing_value}});
  write_mask_pbm((fs::path(out_dir) / "mask.pbm").string(), mask);

  ordered_json summary;
  summary["sigma"] = sigma.value;
  summary["beta"] = threshold.beta;
  summary["nSignificant"] = mask.count_set();
  summary["anchorRect"] = anchor_rect_json(hm.anchors);
  summary["config"] = ordered_json{{"command", "scan"},
                                   {"input", input},
                                   {"stat", stat},
                                   {"d", d},
                                   {"h", h},
                                   {"angles", config.angles},
                                   {"sigma", sigma_tag},
                                   {"beta", threshold.beta},
                                   {"T", field.size()}};
  write_json((fs::path(out_dir) / "summary.json").string(), summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_estimate_sigma(const std::string& input, const std::string& out_path) {
  const GrayField field = load_square_field(input);
  const SigmaEstimate est = silverman_sigma(field);
  ordered_json j;
  j["sigma"] = est.value;
  j["degenerate"] = est.degenerate;
  j["method"] = est.method;
  j["n"] = est.sample_size;
  j["config"] = ordered_json{{"command", "estimate-sigma"}, {"input", input}};
  if (!out_path.empty()) write_json(out_path, j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_calibrate(const std::string& stat, double d, double h,
                  const std::string& calib_angles_deg, int T, double level, int reps,
                  const std::string& noise_tag, const std::string& sigma_tag,
                  std::uint64_t seed, const std::string& cache_path, int threads) {
  CalibrationRequest request;
  request.stat = parse_stat(stat);
  request.window = WindowSpec{d, h};
  request.calibration_angles = angles_from_flags(calib_angles_deg, 1);
  request.T = T;
  request.level = level;
  request.replicates = reps;
  request.noise = NoiseModel::parse(noise_tag);
  request.sigma = SigmaSource::parse(sigma_tag);
  request.seed = seed;

  const ThresholdRecord record = calibrate_threshold(request, threads);
  if (!cache_path.empty()) {
    ThresholdCache cache = ThresholdCache::load(cache_path);
    cache.put(record);
    cache.save(cache_path);
  }
  std::cout << threshold_json(record).dump(2) << '\n';
  return 0;
}

int cmd_simulate_fp(const std::string& stat, double d, double h,
                    const std::string& angles_deg, int num_angles, int T, int reps,
                    const std::string& noise_tag, const std::string& sigma_tag,
                    std::uint64_t seed, const ThresholdFlags& threshold_flags,
                    const std::string& out_dir, int threads) {
  FpStudyRequest request;
  request.config.kind = parse_stat(stat);
  request.config.window = WindowSpec{d, h};
  request.config.angles = angles_from_flags(angles_deg, num_angles);
  request.config.sigma = SigmaSource::parse(sigma_tag);
  request.config.validate();
  request.T = T;
  request.replicates = reps;
  request.noise = NoiseModel::parse(noise_tag);
  request.seed = seed;
  request.threshold = threshold_flags.resolve(request.config.kind, request.config.window, T);

  const StudyRow row = fp_rate_study(request, threads);
  StudyTable table;
  table.rows.push_back(row);

  ordered_json j;
  j["row"] = study_row_json(row);
  j["config"] = ordered_json{{"command", "simulate-fp"},
                             {"stat", stat},
                             {"d", d},
                             {"h", h},
                             {"evaluationAngles", request.config.angles},
                             {"calibrationAngles", request.threshold.calibration_angles},
                             {"T", T},
                             {"replicates", reps},
                             {"noise", noise_tag},
                             {"sigma", sigma_tag},
                             {"seed", seed},
                             {"beta", request.threshold.beta}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv((fs::path(out_dir) / "fp.csv").string());
    csv << table.to_csv();
    write_json((fs::path(out_dir) / "fp.json").string(), j);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_simulate_detect(double d, double h, int T, int reps, std::uint64_t seed,
                        const std::string& stat, const std::string& sigma_tag,
                        const std::string& widths, const std::string& deltas,
                        const std::string& offsets, double f_length, double f_angle_deg,
                        double target, const ThresholdFlags& threshold_flags,
                        const std::string& out_dir, int threads) {
  DetectionGrid grid;
  grid.T = T;
  grid.window = WindowSpec{d, h};
  grid.fissure_length = f_length;
  grid.fissure_angle = f_angle_deg * kDegToRad;
  grid.widths = parse_number_list(widths);
  grid.amplitudes = parse_number_list(deltas);
  grid.angle_offsets_deg = parse_number_list(offsets);
  grid.stat = parse_stat(stat);
  grid.sigma = SigmaSource::parse(sigma_tag);
  grid.replicates = reps;
  grid.seed = seed;
  grid.threshold = threshold_flags.resolve(grid.stat, grid.window, T);

  const StudyTable table = detection_rate_study(grid, threads);
  const auto rules = min_angles_for_target(table, target);

  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) rows.push_back(study_row_json(row));
  ordered_json rules_json = ordered_json::array();
  for (const auto& rule : rules) {
    rules_json.push_back(ordered_json{{"w", rule.width},
                                      {"delta", rule.amplitude},
                                      {"deltaMaxDeg", rule.delta_max_deg},
                                      {"minAngles", rule.min_angles},
                                      {"attainable", rule.attainable}});
  }
  ordered_json j;
  j["rows"] = rows;
  j["minAnglesForTarget"] = rules_json;
  j["config"] = ordered_json{{"command", "simulate-detect"},
                             {"stat", stat},
                             {"d", d},
                             {"h", h},
                             {"T", T},
                             {"replicates", reps},
                             {"seed", seed},
                             {"sigma", sigma_tag},
                             {"fissureLength", f_length},
                             {"fissureAngleDeg", f_angle_deg},
                             {"target", target},
                             {"beta", grid.threshold.beta}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv((fs::path(out_dir) / "detect.csv").string());
    csv << table.to_csv();
    write_json((fs::path(out_dir) / "detect.json").string(), j);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_fast_scan(const std::string& input, double d, double h,
                  const std::string& angles1_deg, const std::string& angles2_deg,
                  int num_angles2, double dark_quantile, double beta_liberal,
                  double beta_conservative, const std::string& sigma_tag,
                  const std::string& out_dir, int threads) {
  FastScanRequest request;
  request.window = WindowSpec{d, h};
  request.angles_stage1 = angles_from_flags(angles1_deg, 1);
  request.angles_stage2 = angles_from_flags(angles2_deg, num_angles2);
  request.darkness_quantile = dark_quantile;
  request.beta_liberal = beta_liberal;
  request.beta_conservative = beta_conservative;
  request.sigma = SigmaSource::parse(sigma_tag);

  const GrayField field = load_square_field(input);
  const FastScanResult result = fast_scan(field, request, threads);
  if (result.empty_candidates) {
    std::cerr << "warning: darkness filter left no candidate anchors\n";
  }

  ordered_json j;
  j["sigma"] = result.sigma;
  j["candidates"] = result.candidate_count;
  j["stage1Survivors"] = result.stage1_survivors;
  j["stage2Survivors"] = result.stage2_survivors;
  j["nSignificant"] = result.final_significant;
  j["evaluations"] = result.evaluations;
  j["fullScanEvaluations"] = result.full_scan_evaluations;
  j["config"] = ordered_json{{"command", "fast-scan"},
                             {"input", input},
                             {"d", d},
                             {"h", h},
                             {"anglesStage1", request.angles_stage1},
                             {"anglesStage2", request.angles_stage2},
                             {"darkQuantile", dark_quantile},
                             {"betaLiberal", beta_liberal},
                             {"betaConservative", beta_conservative},
                             {"sigma", sigma_tag}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_mask_pbm((fs::path(out_dir) / "mask.pbm").string(), result.final_mask);
    write_json((fs::path(out_dir) / "fastscan.json").string(), j);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_verify(const std::string& suite, int T, int reps, const std::string& noise_tag,
               std::uint64_t seed, const std::string& out_path, int threads) {
  std::vector<VerifyReport> reports;
  const NoiseModel noise = NoiseModel::parse(noise_tag);

  if (suite == "clt" || suite == "all") {
    const WindowSpec spec{0.3, 0.06};
    reports.push_back(verify_clt(region_disk(spec), T, reps, noise, seed, threads));
    reports.push_back(verify_clt(region_disk(spec), T, reps,
                                 NoiseModel::moving_average_all_ones(1), seed + 1,
                                 threads));
  }
  if (suite == "covariance" || suite == "all") {
    const WindowSpec spec{0.3, 0.1};
    const int center = T / 2;
    const int shift = std::max(1, static_cast<int>(std::lround(0.05 * T)));
    std::vector<CovariancePair> pairs;
    pairs.push_back(CovariancePair{"identical", region_disk(spec), region_disk(spec),
                                   center, center, center, center});
    pairs.push_back(CovariancePair{"shifted", region_disk(spec), region_disk(spec),
                                   center, center, center, center + shift});
    pairs.push_back(CovariancePair{"inner_halfpos",
                                   region_segment(spec, Segment::Inner, 0.0),
                                   region_segment(spec, Segment::HalfPos, 0.0), center,
                                   center, center, center});
    reports.push_back(verify_covariance(pairs, T, reps, noise, seed, threads));
  }
  if (suite == "normalization" || suite == "all") {
    // d = 0.32 keeps the lattice-count error of the disk comparable across
    // these sizes, so the 1/T decay of the gap is visible.
    const WindowSpec spec{0.32, 0.06};
    reports.push_back(verify_normalization_equiv(region_disk(spec), {50, 100, 200},
                                                 std::min(reps, 50), noise, seed,
                                                 threads));
  }
  if (reports.empty()) throw ConfigError("unknown verify suite: " + suite);

  bool all_pass = true;
  ordered_json j = ordered_json::array();
  for (const auto& report : reports) {
    all_pass = all_pass && report.all_pass();
    j.push_back(verify_report_json(report));
  }
  ordered_json wrapper;
  wrapper["pass"] = all_pass;
  wrapper["reports"] = j;
  wrapper["config"] = ordered_json{{"command", "verify"}, {"suite", suite},
                                   {"T", T},              {"replicates", reps},
                                   {"noise", noise_tag},  {"seed", seed}};
  if (!out_path.empty()) write_json(out_path, wrapper);
  std::cout << wrapper.dump(2) << '\n';
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Window-contrast scan statistics for line-like anomalies in gray images"};
  app.require_subcommand(1);
  // The window flags are --d and --h, so help must not claim the short -h.
  app.set_help_flag("--help", "print help");

  int threads = default_thread_count();
  app.add_option("--threads", threads, "worker threads (results do not depend on it)");

  const auto plain_help = [](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");
    return sub;
  };

  // generate
  auto* generate = plain_help(app.add_subcommand("generate", "synthesize a noise field, optionally with a fissure"));
  int gen_T = 100;
  std::string gen_noise = "gauss:1";
  std::uint64_t gen_seed = 0;
  double gen_mu0 = 0.0, gen_delta = 0.0, gen_fw = 0.01, gen_fl = 0.1, gen_fa = 0.0;
  std::string gen_center = "0.5,0.5", gen_out;
  generate->add_option("--T", gen_T, "image size");
  generate->add_option("--noise", gen_noise, "noise model tag");
  generate->add_option("--seed", gen_seed, "rng seed")->required();
  generate->add_option("--mu0", gen_mu0, "baseline gray value");
  generate->add_option("--delta", gen_delta, "fissure depth (0 = no fissure)");
  generate->add_option("--fissure-width", gen_fw, "fissure width (rescaled)");
  generate->add_option("--fissure-length", gen_fl, "fissure length (rescaled)");
  generate->add_option("--fissure-angle-deg", gen_fa, "fissure angle in degrees");
  generate->add_option("--fissure-center", gen_center, "fissure center \"x,y\"");
  generate->add_option("--out", gen_out, "output directory")->required();

  // scan
  auto* scan = plain_help(app.add_subcommand("scan", "scan an image and write heat map + mask"));
  std::string scan_input, scan_stat = "fnb1", scan_angles, scan_sigma = "silverman";
  std::string scan_out = "scan-out";
  int scan_num_angles = 9;
  double scan_d = 0.1, scan_h = 0.02;
  ThresholdFlags scan_threshold;
  scan->add_option("--input", scan_input)->required();
  scan->add_option("--stat", scan_stat, "f1|f2|nb|fnb1|fnb2");
  scan->add_option("--d", scan_d, "window diameter (rescaled)");
  scan->add_option("--h", scan_h, "strip width (rescaled)");
  scan->add_option("--angles", scan_angles, "angles in degrees, comma separated");
  scan->add_option("--num-angles", scan_num_angles, "equidistant angle count");
  scan->add_option("--sigma", scan_sigma, "silverman|known:<v>");
  scan->add_option("--beta", scan_threshold.beta, "explicit threshold");
  scan->add_option("--threshold-cache", scan_threshold.cache_path, "cache file");
  scan->add_option("--level", scan_threshold.level, "cache lookup level");
  scan->add_option("--out", scan_out, "output directory");

  // estimate-sigma
  auto* est = plain_help(app.add_subcommand("estimate-sigma", "robust scale estimate of an image"));
  std::string est_input, est_out;
  est->add_option("--input", est_input)->required();
  est->add_option("--out", est_out, "optional json output path");

  // calibrate
  auto* calib = plain_help(app.add_subcommand("calibrate", "monte-carlo threshold calibration"));
  std::string cal_stat = "fnb1", cal_angles = "0", cal_noise = "gauss:1";
  std::string cal_sigma = "silverman", cal_cache = "thresholds.json";
  int cal_T = 100, cal_reps = 2000;
  double cal_d = 0.1, cal_h = 0.02, cal_level = 0.95;
  std::uint64_t cal_seed = 0;
  calib->add_option("--stat", cal_stat);
  calib->add_option("--d", cal_d);
  calib->add_option("--h", cal_h);
  calib->add_option("--angles", cal_angles, "calibration angles in degrees");
  calib->add_option("--T", cal_T);
  calib->add_option("--level", cal_level);
  calib->add_option("--reps", cal_reps);
  calib->add_option("--noise", cal_noise);
  calib->add_option("--sigma", cal_sigma);
  calib->add_option("--seed", cal_seed)->required();
  calib->add_option("--threshold-cache", cal_cache, "cache file to update");

  // simulate-fp
  auto* fp = plain_help(app.add_subcommand("simulate-fp", "false-positive rate under the null"));
  std::string fp_stat = "fnb1", fp_angles, fp_noise = "gauss:1", fp_sigma = "silverman";
  std::string fp_out;
  int fp_num_angles = 1, fp_T = 100, fp_reps = 1000;
  double fp_d = 0.1, fp_h = 0.02;
  std::uint64_t fp_seed = 0;
  ThresholdFlags fp_threshold;
  fp->add_option("--stat", fp_stat);
  fp->add_option("--d", fp_d);
  fp->add_option("--h", fp_h);
  fp->add_option("--angles", fp_angles, "evaluation angles in degrees");
  fp->add_option("--num-angles", fp_num_angles);
  fp->add_option("--T", fp_T);
  fp->add_option("--reps", fp_reps);
  fp->add_option("--noise", fp_noise);
  fp->add_option("--sigma", fp_sigma);
  fp->add_option("--seed", fp_seed)->required();
  fp->add_option("--beta", fp_threshold.beta);
  fp->add_option("--threshold-cache", fp_threshold.cache_path);
  fp->add_option("--level", fp_threshold.level);
  fp->add_option("--out", fp_out, "output directory");

  // simulate-detect
  auto* det = plain_help(app.add_subcommand("simulate-detect", "detection rates under angle misspecification"));
  std::string det_stat = "fnb1", det_sigma = "silverman", det_out;
  std::string det_widths = "0.02", det_deltas = "1.5", det_offsets = "0,5,10,15,20,25";
  int det_T = 100, det_reps = 300;
  double det_d = 0.1, det_h = 0.02, det_fl = 0.6, det_fa = 0.0, det_target = 0.75;
  std::uint64_t det_seed = 0;
  ThresholdFlags det_threshold;
  det->add_option("--stat", det_stat);
  det->add_option("--d", det_d);
  det->add_option("--h", det_h);
  det->add_option("--T", det_T);
  det->add_option("--reps", det_reps);
  det->add_option("--seed", det_seed)->required();
  det->add_option("--sigma", det_sigma);
  det->add_option("--widths", det_widths, "fissure widths, comma separated");
  det->add_option("--deltas", det_deltas, "fissure depths, comma separated");
  det->add_option("--miss", det_offsets, "angle offsets in degrees");
  det->add_option("--fissure-length", det_fl);
  det->add_option("--fissure-angle-deg", det_fa);
  det->add_option("--target", det_target, "target detection rate");
  det->add_option("--beta", det_threshold.beta);
  det->add_option("--threshold-cache", det_threshold.cache_path);
  det->add_option("--level", det_threshold.level);
  det->add_option("--out", det_out, "output directory");

  // fast-scan
  auto* fast = plain_help(app.add_subcommand("fast-scan", "two-stage scan over dark pixels"));
  std::string fast_input, fast_angles1 = "0,60,120", fast_angles2, fast_sigma = "silverman";
  std::string fast_out;
  int fast_num2 = 9;
  double fast_d = 0.1, fast_h = 0.02, fast_dark = 0.1;
  double fast_bl = 0.0, fast_bc = 0.0;
  fast->add_option("--input", fast_input)->required();
  fast->add_option("--d", fast_d);
  fast->add_option("--h", fast_h);
  fast->add_option("--angles1", fast_angles1, "stage-1 angles in degrees");
  fast->add_option("--angles2", fast_angles2, "stage-2 angles in degrees");
  fast->add_option("--num-angles2", fast_num2);
  fast->add_option("--dark-quantile", fast_dark);
  fast->add_option("--beta-liberal", fast_bl)->required();
  fast->add_option("--beta-conservative", fast_bc)->required();
  fast->add_option("--sigma", fast_sigma);
  fast->add_option("--out", fast_out, "output directory");

  // verify
  auto* verify = plain_help(app.add_subcommand("verify", "empirical checks of the limit theorems"));
  std::string ver_suite = "all", ver_noise = "gauss:1", ver_out;
  int ver_T = 60, ver_reps = 1000;
  std::uint64_t ver_seed = 0;
  verify->add_option("--suite", ver_suite, "clt|covariance|normalization|all");
  verify->add_option("--T", ver_T);
  verify->add_option("--reps", ver_reps);
  verify->add_option("--noise", ver_noise);
  verify->add_option("--seed", ver_seed)->required();
  verify->add_option("--out", ver_out, "optional json output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(gen_T, gen_noise, gen_seed, gen_mu0, gen_delta, gen_fw, gen_fl,
                          gen_fa, gen_center, gen_out);
    }
    if (scan->parsed()) {
      return cmd_scan(scan_input, scan_stat, scan_d, scan_h, scan_angles,
                      scan_num_angles, scan_sigma, scan_threshold, scan_out, threads);
    }
    if (est->parsed()) return cmd_estimate_sigma(est_input, est_out);
    if (calib->parsed()) {
      return cmd_calibrate(cal_stat, cal_d, cal_h, cal_angles, cal_T, cal_level,
                           cal_reps, cal_noise, cal_sigma, cal_seed, cal_cache, threads);
    }
    if (fp->parsed()) {
      return cmd_simulate_fp(fp_stat, fp_d, fp_h, fp_angles, fp_num_angles, fp_T,
                             fp_reps, fp_noise, fp_sigma, fp_seed, fp_threshold, fp_out,
                             threads);
    }
    if (det->parsed()) {
      return cmd_simulate_detect(det_d, det_h, det_T, det_reps, det_seed, det_stat,
                                 det_sigma, det_widths, det_deltas, det_offsets, det_fl,
                                 det_fa, det_target, det_threshold, det_out, threads);
    }
    if (fast->parsed()) {
      return cmd_fast_scan(fast_input, fast_d, fast_h, fast_angles1, fast_angles2,
                           fast_num2, fast_dark, fast_bl, fast_bc, fast_sigma, fast_out,
                           threads);
    }
    if (verify->parsed()) {
      return cmd_verify(ver_suite, ver_T, ver_reps, ver_noise, ver_seed, ver_out,
                        threads);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
