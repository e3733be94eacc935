#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fisscan/errors.hpp"
#include "fisscan/verify.hpp"

using namespace fisscan;

TEST_CASE("sample moments of a known sample") {
  // Symmetric two-point sample: variance n/(n-1), zero skew, kurtosis -2.
  const std::vector<double> xs{-1.0, 1.0, -1.0, 1.0};
  const SampleMoments m = sample_moments(xs);
  CHECK(m.mean == 0.0);
  CHECK(m.variance == doctest::Approx(4.0 / 3.0));
  CHECK(m.skewness == 0.0);
  CHECK(m.excess_kurtosis == doctest::Approx(-2.0));
  CHECK(sample_covariance(xs, xs) == doctest::Approx(m.variance));
}

TEST_CASE("area intersection estimates") {
  const WindowSpec spec{0.2, 0.04};
  const Region disk = region_disk(spec);

  const AreaEstimate self = area_intersection_estimate(disk.contains, disk.contains,
                                                       0.12, 2.0 * disk.perimeter, 400);
  CHECK(std::abs(self.area - disk.area) <= self.error_bound);

  // Disjoint translates.
  const auto shifted = [&](Vec2 p) { return disk.contains(Vec2{p.x - 0.5, p.y}); };
  const AreaEstimate none = area_intersection_estimate(disk.contains, shifted, 0.7,
                                                       2.0 * disk.perimeter, 400);
  CHECK(none.area == 0.0);

  // Inner cap of the half disk is exactly half of the inner strip.
  const Region inner = region_segment(spec, Segment::Inner, 0.0);
  const Region half = region_segment(spec, Segment::HalfPos, 0.0);
  const AreaEstimate cap = area_intersection_estimate(
      inner.contains, half.contains, 0.12, inner.perimeter + half.perimeter, 800);
  CHECK(std::abs(cap.area - exact_area(spec, Segment::Inner) / 2.0) <= cap.error_bound);

  // Error shrinks at roughly rate 1/R: doubling the resolution should cut the
  // error by at least 1.8x on average over several shapes.
  double ratio_sum = 0.0;
  int shapes = 0;
  for (Segment seg : {Segment::Inner, Segment::Upper, Segment::Lower, Segment::HalfPos,
                      Segment::HalfNeg}) {
    const Region region = region_segment(spec, seg, 0.4);
    double err_lo = 0.0, err_hi = 0.0;
    // Average the absolute error over a few resolutions around R and 2R to
    // smooth the lattice oscillation.
    for (int r : {400, 408, 416, 424}) {
      err_lo += std::abs(area_intersection_estimate(region.contains, region.contains,
                                                    0.12, region.perimeter, r)
                             .area -
                         region.area);
      err_hi += std::abs(area_intersection_estimate(region.contains, region.contains,
                                                    0.12, region.perimeter, 2 * r)
                             .area -
                         region.area);
    }
    ratio_sum += err_lo / std::max(err_hi, 1e-12);
    ++shapes;
  }
  CHECK(ratio_sum / shapes >= 1.8);

  CHECK_THROWS_AS(area_intersection_estimate(disk.contains, disk.contains, 0.12, 1.0, 50),
                  ConfigError);
}

TEST_CASE("clt verification at reduced scale") {
  const WindowSpec spec{0.3, 0.1};
  const VerifyReport iid =
      verify_clt(region_disk(spec), 40, 400, NoiseModel::gaussian(1.0), 2024, 2);
  for (const auto& c : iid.checks) {
    INFO(c.name, " estimate=", c.estimate, " target=", c.target);
    CHECK(c.pass);
  }
  const VerifyReport ma = verify_clt(region_disk(spec), 40, 400,
                                     NoiseModel::moving_average_all_ones(1), 2025, 2);
  CHECK(ma.all_pass());

  CHECK_THROWS_AS(
      verify_clt(region_disk(spec), 40, 100, NoiseModel::gaussian(1.0), 1, 1),
      ConfigError);
}

TEST_CASE("covariance verification agrees with the clt variance bitwise") {
  const WindowSpec spec{0.3, 0.1};
  const int T = 40;
  const int reps = 300;
  const NoiseModel noise = NoiseModel::gaussian(1.0);
  const std::uint64_t seed = 99;

  const VerifyReport clt = verify_clt(region_disk(spec), T, reps, noise, seed, 2);
  CovariancePair same{"identical", region_disk(spec), region_disk(spec),
                      T / 2, T / 2, T / 2, T / 2};
  const VerifyReport cov = verify_covariance({same}, T, reps, noise, seed, 2);
  REQUIRE(cov.checks.size() == 1);
  // Same replicate streams, same accumulation: bit-identical estimates.
  CHECK(cov.checks[0].estimate == clt.checks[1].estimate);
  CHECK(cov.checks[0].pass);

  // Disjoint windows: zero covariance within the absolute tolerance.
  CovariancePair apart{"disjoint", region_disk(spec), region_disk(spec),
                       12, 12, 12 + 14, 12 + 14};
  const VerifyReport zero = verify_covariance({apart}, T, 400, noise, 7, 2);
  REQUIRE(zero.checks.size() == 1);
  CHECK(zero.checks[0].target == 0.0);
  CHECK(zero.checks[0].pass);
}

TEST_CASE("normalization equivalence gap shrinks") {
  // The gap is proportional to the lattice-count error of the window, which
  // fluctuates with the radius; d = 0.32 keeps the per-size errors comparable
  // so the 1/T trend is visible at these sizes.
  const WindowSpec spec{0.32, 0.1};
  const VerifyReport report = verify_normalization_equiv(
      region_disk(spec), {50, 100, 200}, 12, NoiseModel::gaussian(1.0), 31, 2);
  for (const auto& c : report.checks) {
    INFO(c.name, " D(next)=", c.estimate, " D(prev)=", c.target);
    CHECK(c.pass);
  }
  // The gap decays like 1/T: D(T)*T stays within a small factor of its first
  // value across a 4x size range.
  REQUIRE(report.checks.size() == 2);
  const double first = report.checks[0].target * 50.0;
  CHECK(report.checks[0].estimate * 100.0 <= 2.0 * first);
  CHECK(report.checks[1].estimate * 200.0 <= 2.0 * first);
  CHECK_THROWS_AS(verify_normalization_equiv(region_disk(spec), {60, 30}, 5,
                                             NoiseModel::gaussian(1.0), 1, 1),
                  ConfigError);
}
