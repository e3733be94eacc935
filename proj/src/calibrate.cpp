#include "fisscan/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>

#include <json.hpp>

#include "fisscan/errors.hpp"
#include "fisscan/parallel.hpp"

namespace fisscan {

bool ThresholdRecord::same_key(const ThresholdRecord& other) const {
  return stat == other.stat && d == other.d && h == other.h && T == other.T &&
         calibration_angles == other.calibration_angles && level == other.level &&
         replicates == other.replicates && seed == other.seed &&
         noise_model == other.noise_model && sigma_source == other.sigma_source;
}

std::vector<double> calibration_maxima(const CalibrationRequest& request,
                                       int* degenerate_retries, int threads) {
  if (request.replicates < 1) throw ConfigError("calibration needs replicates >= 1");
  if (!(request.level > 0.0 && request.level < 1.0)) {
    throw ConfigError("calibration level must lie in (0, 1)");
  }
  request.noise.validate();

  StatConfig config;
  config.kind = request.stat;
  config.window = request.window;
  config.angles = request.calibration_angles;
  config.sigma = request.sigma;
  const ScanEngine engine(config, request.T);

  std::vector<double> maxima(request.replicates);
  std::atomic<int> retries{0};
  parallel_for(request.replicates, threads, [&](std::int64_t r) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      // Derived sub-stream for retries after a degenerate scale estimate.
      const std::uint64_t replicate_id =
          static_cast<std::uint64_t>(r) +
          attempt * static_cast<std::uint64_t>(request.replicates);
      const GrayField field = generate_noise(request.noise, request.T, request.seed,
                                             replicate_id);
      const SigmaEstimate sigma = resolve_sigma(field, request.sigma);
      if (sigma.degenerate) {
        retries.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      maxima[r] = engine.max_over_anchors(field, sigma.value, 1);
      break;
    }
  });
  if (degenerate_retries) *degenerate_retries = retries.load();
  return maxima;
}

ThresholdRecord calibrate_threshold(const CalibrationRequest& request, int threads) {
  int retries = 0;
  std::vector<double> maxima = calibration_maxima(request, &retries, threads);
  std::sort(maxima.begin(), maxima.end());

  ThresholdRecord record;
  record.beta = interpolated_quantile(maxima, request.level);
  record.stat = request.stat;
  record.d = request.window.d;
  record.h = request.window.h;
  record.T = request.T;
  record.calibration_angles = request.calibration_angles;
  record.level = request.level;
  record.replicates = request.replicates;
  record.seed = request.seed;
  record.noise_model = request.noise.tag();
  record.sigma_source = request.sigma.tag();
  record.degenerate_retries = retries;
  return record;
}

namespace {

nlohmann::ordered_json record_to_json(const ThresholdRecord& r) {
  nlohmann::ordered_json j;
  j["beta"] = r.beta;
  j["stat"] = stat_name(r.stat);
  j["d"] = r.d;
  j["h"] = r.h;
  j["T"] = r.T;
  j["calibrationAngles"] = r.calibration_angles;
  j["level"] = r.level;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["noiseModel"] = r.noise_model;
  j["sigmaSource"] = r.sigma_source;
  j["degenerateRetries"] = r.degenerate_retries;
  return j;
}

ThresholdRecord record_from_json(const nlohmann::json& j) {
  ThresholdRecord r;
  r.beta = j.at("beta").get<double>();
  r.stat = parse_stat(j.at("stat").get<std::string>());
  r.d = j.at("d").get<double>();
  r.h = j.at("h").get<double>();
  r.T = j.at("T").get<int>();
  r.calibration_angles = j.at("calibrationAngles").get<std::vector<double>>();
  r.level = j.at("level").get<double>();
  r.replicates = j.at("replicates").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.noise_model = j.at("noiseModel").get<std::string>();
  r.sigma_source = j.at("sigmaSource").get<std::string>();
  r.degenerate_retries = j.value("degenerateRetries", 0);
  return r;
}

}  // namespace

ThresholdCache ThresholdCache::load(const std::string& path) {
  ThresholdCache cache;
  std::ifstream in(path);
  if (!in) return cache;
  nlohmann::json j;
  try {
    in >> j;
    if (!j.is_array()) throw DataError("threshold cache is not a JSON array");
    for (const auto& item : j) cache.records_.push_back(record_from_json(item));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt threshold cache " + path + ": " + e.what());
  }
  return cache;
}

void ThresholdCache::save(const std::string& path) const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : records_) j.push_back(record_to_json(r));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write threshold cache " + path);
  out << j.dump(2) << '\n';
}

void ThresholdCache::put(const ThresholdRecord& record) {
  for (auto& existing : records_) {
    if (existing.same_key(record)) {
      existing = record;
      return;
    }
  }
  records_.push_back(record);
}

std::optional<ThresholdRecord> ThresholdCache::get(const ThresholdRecord& key) const {
  for (const auto& r : records_) {
    if (r.same_key(key)) return r;
  }
  return std::nullopt;
}

std::optional<ThresholdRecord> ThresholdCache::find(StatKind stat, double d, double h,
                                                    int T, double level) const {
  std::optional<ThresholdRecord> best;
  for (const auto& r : records_) {
    if (r.stat != stat || r.d != d || r.h != h || r.T != T || r.level != level) continue;
    if (!best || r.replicates > best->replicates) best = r;
  }
  return best;
}

}  // namespace fisscan
