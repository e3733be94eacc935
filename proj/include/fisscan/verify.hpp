#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fisscan/field.hpp"
#include "fisscan/geometry.hpp"

namespace fisscan {

// A scan region for the verification checks: membership relative to the
// window center, its exact area, a radius bound for rasterization and a
// boundary-length bound for grid-count error estimates.
struct Region {
  std::string name;
  std::function<bool(Vec2)> contains;
  double area = 0.0;
  double radius_bound = 0.0;
  double perimeter = 0.0;
};

Region region_disk(const WindowSpec& spec);
Region region_segment(const WindowSpec& spec, Segment seg, double angle);

struct CheckResult {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool ratio_check = false;  // |estimate/target - 1| vs |estimate - target|
  bool pass = false;
};

struct VerifyReport {
  std::string title;
  std::vector<CheckResult> checks;

  bool all_pass() const;
};

// Moment checks of the normalized window sum S_A(center)/T against the
// centered normal with variance sigma^2 * area(A).
//   |mean| <= 4 sd/sqrt(n), |var ratio - 1| <= 5 sqrt(2/n),
//   |skewness| <= 0.3, |excess kurtosis| <= 0.6.
VerifyReport verify_clt(const Region& region, int T, int replicates,
                        const NoiseModel& noise, std::uint64_t seed, int threads = 1);

// Sample covariance of (S_A(s)/T, S_B(t)/T) against sigma^2 times the
// grid-estimated area of A(s) intersect B(t). Ratio tolerance 5 sqrt(2/n)
// when the target is positive, otherwise 3 estimator standard errors.
struct CovariancePair {
  std::string name;
  Region region_a;
  Region region_b;
  int anchor_a_row = 0, anchor_a_col = 0;
  int anchor_b_row = 0, anchor_b_col = 0;
};

VerifyReport verify_covariance(const std::vector<CovariancePair>& pairs, int T,
                               int replicates, const NoiseModel& noise,
                               std::uint64_t seed, int threads = 1);

// D(T) = average over replicates of the worst anchor-wise gap between the
// count-normalized and the area-normalized window mean; checks that D is
// nonincreasing along the T list within 20 percent slack.
VerifyReport verify_normalization_equiv(const Region& region, const std::vector<int>& Ts,
                                        int replicates, const NoiseModel& noise,
                                        std::uint64_t seed, int threads = 1);

// Grid-count estimate of the area of A intersect B over a bounding box
// centered at the origin with the given half-width.
struct AreaEstimate {
  double area = 0.0;
  double error_bound = 0.0;
  long long count = 0;
};

AreaEstimate area_intersection_estimate(const std::function<bool(Vec2)>& a,
                                        const std::function<bool(Vec2)>& b,
                                        double box_half_width, double perimeter_sum,
                                        int resolution);

// Sample moments used by the checks.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // n-1 denominator
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

SampleMoments sample_moments(const std::vector<double>& xs);
double sample_covariance(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace fisscan
