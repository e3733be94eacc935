#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "fisscan/calibrate.hpp"
#include "fisscan/errors.hpp"

using namespace fisscan;

namespace {

CalibrationRequest small_request() {
  CalibrationRequest req;
  req.stat = StatKind::FnB1;
  req.window = WindowSpec{0.2, 0.06};
  req.calibration_angles = {0.0};
  req.T = 50;
  req.level = 0.95;
  req.replicates = 40;
  req.noise = NoiseModel::gaussian(1.0);
  req.sigma = SigmaSource::silverman();
  req.seed = 4242;
  return req;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("calibration determinism and thread independence") {
  const CalibrationRequest req = small_request();
  const ThresholdRecord a = calibrate_threshold(req, 1);
  const ThresholdRecord b = calibrate_threshold(req, 2);
  CHECK(a.beta == b.beta);
  CHECK(a.beta > 0.0);
  CHECK(a.same_key(b));
  CHECK(a.degenerate_retries == 0);
}

TEST_CASE("top quantile equals the maximum") {
  CalibrationRequest req = small_request();
  req.replicates = 10;
  req.level = 0.9999;  // top of the interpolation range
  int retries = 0;
  std::vector<double> maxima = calibration_maxima(req, &retries, 2);
  const double top = *std::max_element(maxima.begin(), maxima.end());
  req.level = 0.9999;
  // With n = 10 the interpolation position 0.9999 * 9 falls inside the last
  // gap; pushing the level to 1 - eps pins it to the maximum.
  std::sort(maxima.begin(), maxima.end());
  CHECK(interpolated_quantile(maxima, 1.0) == top);
  CHECK(interpolated_quantile(maxima, 0.9999) <= top);
  CHECK(interpolated_quantile(maxima, 0.9999) >=
        maxima[maxima.size() - 2]);
}

TEST_CASE("quantile monotone in level") {
  CalibrationRequest req = small_request();
  int retries = 0;
  std::vector<double> maxima = calibration_maxima(req, &retries, 2);
  std::sort(maxima.begin(), maxima.end());
  CHECK(interpolated_quantile(maxima, 0.99) >= interpolated_quantile(maxima, 0.95));
}

TEST_CASE("invalid requests") {
  CalibrationRequest req = small_request();
  req.replicates = 0;
  CHECK_THROWS_AS(calibrate_threshold(req), ConfigError);
  req = small_request();
  req.level = 1.0;
  CHECK_THROWS_AS(calibrate_threshold(req), ConfigError);
}

TEST_CASE("threshold cache round trip") {
  const std::string path = temp_path("fisscan_cache_test.json");
  std::filesystem::remove(path);

  const ThresholdRecord record = calibrate_threshold(small_request(), 2);
  ThresholdCache cache;
  cache.put(record);
  cache.save(path);

  const ThresholdCache loaded = ThresholdCache::load(path);
  const auto found = loaded.get(record);
  REQUIRE(found.has_value());
  CHECK(found->beta == record.beta);
  CHECK(found->calibration_angles == record.calibration_angles);
  CHECK(found->noise_model == record.noise_model);

  ThresholdRecord other = record;
  other.level = 0.99;
  CHECK_FALSE(loaded.get(other).has_value());

  // The cache file is authoritative: a hand-edited beta is returned as is.
  ThresholdCache edited = loaded;
  ThresholdRecord tweaked = record;
  tweaked.beta = 123.5;
  edited.put(tweaked);
  edited.save(path);
  const auto reread = ThresholdCache::load(path).get(record);
  REQUIRE(reread.has_value());
  CHECK(reread->beta == 123.5);

  std::filesystem::remove(path);
}

TEST_CASE("corrupt cache file reports its path") {
  const std::string path = temp_path("fisscan_cache_corrupt.json");
  {
    FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("{not json[", f);
    std::fclose(f);
  }
  try {
    ThresholdCache::load(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  std::filesystem::remove(path);

  // A missing file is an empty cache, not an error.
  CHECK(ThresholdCache::load(temp_path("fisscan_cache_missing.json")).records().empty());
}
