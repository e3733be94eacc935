#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fisscan/field.hpp"
#include "fisscan/rng.hpp"

using namespace fisscan;

namespace {

double grand_mean(const GrayField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.pixel_count());
}

double lag_correlation(const GrayField& f, int lag_r, int lag_c) {
  const int T = f.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
  long long n = 0;
  for (int r = 1; r + lag_r <= T; ++r) {
    for (int c = 1; c + lag_c <= T; ++c) {
      const double x = f.at(r, c);
      const double y = f.at(r + lag_r, c + lag_c);
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
      sx += x;
      sy += y;
      ++n;
    }
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  return cov / std::sqrt(vx * vy);
}

}  // namespace

TEST_CASE("noise generation is deterministic per (model, T, seed, replicate)") {
  const NoiseModel model = NoiseModel::gaussian(1.0);
  const GrayField a = generate_noise(model, 64, 42);
  const GrayField b = generate_noise(model, 64, 42);
  CHECK(a.values() == b.values());
  const GrayField c = generate_noise(model, 64, 43);
  CHECK(a.values() != c.values());
  const GrayField d = generate_noise(model, 64, 42, 1);
  CHECK(a.values() != d.values());

  const NoiseModel ma = NoiseModel::moving_average_all_ones(2, 0.5);
  CHECK(generate_noise(ma, 48, 9).values() == generate_noise(ma, 48, 9).values());
}

TEST_CASE("gaussian grand mean obeys the clt bound") {
  const GrayField f = generate_noise(NoiseModel::gaussian(1.0), 200, 1234);
  CHECK(std::abs(grand_mean(f)) <= 3.0 / 200.0);
}

TEST_CASE("centered exponential and gamma noise") {
  const GrayField e = generate_noise(NoiseModel::exponential(1.0), 100, 77);
  CHECK(std::abs(grand_mean(e)) <= 4.0 * 1.0 / 100.0);
  const GrayField g = generate_noise(NoiseModel::gamma(4.0, 2.0), 100, 78);
  const double g_sd = std::sqrt(4.0) / 2.0;
  CHECK(std::abs(grand_mean(g)) <= 4.0 * g_sd / 100.0);
}

TEST_CASE("moving average is exactly M-dependent") {
  const NoiseModel ma = NoiseModel::moving_average_all_ones(1);
  CHECK(m_dependence_range(ma) == 2);
  CHECK(m_dependence_range(NoiseModel::moving_average_all_ones(3)) == 6);
  CHECK(m_dependence_range(NoiseModel::gaussian(1)) == 0);

  // Correlation beyond the dependence range vanishes; inside it does not.
  const GrayField f = generate_noise(ma, 1000, 5);
  CHECK(std::abs(lag_correlation(f, 3, 0)) <= 0.05);
  CHECK(std::abs(lag_correlation(f, 0, 3)) <= 0.05);
  CHECK(lag_correlation(f, 1, 0) > 0.3);
}

TEST_CASE("moving average stationarity across sub-rectangles") {
  const GrayField f = generate_noise(NoiseModel::moving_average_all_ones(1), 400, 21);
  auto block_stats = [&](int r0, int c0, int side, double& mean, double& var) {
    double s = 0.0, ss = 0.0;
    for (int r = r0; r < r0 + side; ++r) {
      for (int c = c0; c < c0 + side; ++c) {
        s += f.at(r, c);
        ss += f.at(r, c) * f.at(r, c);
      }
    }
    const double n = static_cast<double>(side) * side;
    mean = s / n;
    var = ss / n - mean * mean;
  };
  double m1, v1, m2, v2;
  block_stats(1, 1, 200, m1, v1);
  block_stats(201, 201, 200, m2, v2);
  const double marginal_sd = 3.0;  // sqrt(9) innovations per pixel
  CHECK(std::abs(m1 - m2) <= 0.2 * marginal_sd);
  CHECK(std::abs(v1 / v2 - 1.0) <= 0.15);
}

TEST_CASE("long-run variance") {
  CHECK(long_run_variance(NoiseModel::gaussian(1.0)) == 1.0);
  CHECK(long_run_variance(NoiseModel::gaussian(2.0)) == 4.0);
  CHECK(long_run_variance(NoiseModel::student_t(4.0)) == doctest::Approx(2.0));
  CHECK(long_run_variance(NoiseModel::exponential(2.0)) == doctest::Approx(0.25));
  CHECK(long_run_variance(NoiseModel::gamma(4.0, 2.0)) == doctest::Approx(1.0));
  CHECK(long_run_variance(NoiseModel::moving_average_all_ones(1)) ==
        doctest::Approx(81.0));

  // Block-sum Monte Carlo oracle: Var(S_block / side) approaches the long-run
  // variance for blocks much larger than the dependence range.
  const NoiseModel ma = NoiseModel::moving_average_all_ones(1);
  const int side = 60;
  std::vector<double> block_sums;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const GrayField f = generate_noise(ma, 600, 1001, rep);
    for (int br = 0; br < 10; ++br) {
      for (int bc = 0; bc < 10; ++bc) {
        double s = 0.0;
        for (int r = 1; r <= side; ++r) {
          for (int c = 1; c <= side; ++c) {
            s += f.at(br * side + r, bc * side + c);
          }
        }
        block_sums.push_back(s / side);
      }
    }
  }
  double mean = 0.0;
  for (double v : block_sums) mean += v;
  mean /= static_cast<double>(block_sums.size());
  double var = 0.0;
  for (double v : block_sums) var += (v - mean) * (v - mean);
  var /= static_cast<double>(block_sums.size() - 1);
  CHECK(std::abs(var / 81.0 - 1.0) <= 0.10);
}

TEST_CASE("anomaly injection") {
  const int T = 100;
  const GrayField zero(T, 0.0);
  SignalSpec signal;
  signal.baseline = 0.5;
  signal.anomaly.center = {0.5, 0.5};
  signal.anomaly.length = 0.4;
  signal.anomaly.width = 0.02;
  signal.anomaly.angle = 0.0;
  signal.anomaly.amplitude = 0.0;

  // Zero depth: pure baseline shift.
  GrayField shifted = inject_anomaly(zero, signal);
  for (double v : shifted.values()) CHECK(v == 0.5);

  signal.anomaly.amplitude = 2.0;
  GrayField dipped = inject_anomaly(zero, signal);
  CHECK(dipped.at(50, 50) == 0.5 - 2.0);
  CHECK(dipped.at(10, 10) == 0.5);

  // Modified pixel fraction approaches the rectangle area.
  for (int big : {200, 400, 800}) {
    const auto px = anomaly_pixels(signal.anomaly, big);
    const double frac = static_cast<double>(px.size()) / big / big;
    CHECK(std::abs(frac - 0.4 * 0.02) <= 3.0 * 0.4 / big + 3.0 * 0.02 / big);
  }
}

TEST_CASE("noise model validation and tags") {
  CHECK_THROWS_AS(generate_noise(NoiseModel::gaussian(0.0), 10, 1), std::domain_error);
  CHECK_THROWS_AS(generate_noise(NoiseModel::student_t(2.0), 10, 1), std::domain_error);
  CHECK_THROWS_AS(generate_noise(NoiseModel::gamma(-1.0, 1.0), 10, 1), std::domain_error);
  NoiseModel zero_weights = NoiseModel::moving_average(1, std::vector<double>(9, 0.0));
  CHECK_THROWS_AS(zero_weights.validate(), std::domain_error);

  for (const char* tag : {"gauss:1", "t:4", "exp:1", "gamma:4:2", "ma:1:1"}) {
    CHECK(NoiseModel::parse(tag).tag() == tag);
  }
  CHECK_THROWS_AS(NoiseModel::parse("weibull:1"), std::domain_error);
}

TEST_CASE("student-t sampler variance sanity") {
  const GrayField f = generate_noise(NoiseModel::student_t(5.0), 200, 3);
  double ss = 0.0;
  for (double v : f.values()) ss += v * v;
  const double var = ss / static_cast<double>(f.pixel_count());
  CHECK(var == doctest::Approx(5.0 / 3.0).epsilon(0.1));
}
