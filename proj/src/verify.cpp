#include "fisscan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fisscan/errors.hpp"
#include "fisscan/parallel.hpp"
#include "fisscan/stats.hpp"

namespace fisscan {

Region region_disk(const WindowSpec& spec) {
  Region r;
  r.name = "disk";
  r.contains = [spec](Vec2 x) { return disk_contains(spec, x); };
  r.area = disk_area(spec);
  r.radius_bound = spec.d / 2.0;
  r.perimeter = std::numbers::pi * spec.d;
  return r;
}

Region region_segment(const WindowSpec& spec, Segment seg, double angle) {
  Region r;
  r.name = std::string(segment_name(seg));
  r.contains = [spec, seg, angle](Vec2 x) { return segment_contains(spec, seg, angle, x); };
  r.area = exact_area(spec, seg);
  r.radius_bound = spec.d / 2.0;
  // Arc plus the straight cuts; a crude upper bound is enough here.
  r.perimeter = std::numbers::pi * spec.d + 2.0 * spec.d;
  return r;
}

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

SampleMoments sample_moments(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw std::domain_error("sample moments need at least two values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  SampleMoments out;
  out.mean = mean;
  out.variance = m2 * static_cast<double>(n) / static_cast<double>(n - 1);
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

double sample_covariance(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) throw std::domain_error("covariance needs paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (xs[i] - mx) * (ys[i] - my);
  return acc / static_cast<double>(n - 1);
}

namespace {

double mask_sum(const GrayField& field, const OffsetMask& mask, int row, int col) {
  const int T = field.size();
  const double* base = field.data() + static_cast<std::size_t>(row - 1) * T + (col - 1);
  double s = 0.0;
  for (const Offset& o : mask.offsets) s += base[static_cast<long long>(o.dr) * T + o.dc];
  return s;
}

void require_anchor_fits(const OffsetMask& mask, int T, int row, int col) {
  if (row + mask.lo.dr < 1 || row + mask.hi.dr > T || col + mask.lo.dc < 1 ||
      col + mask.hi.dc > T) {
    throw ConfigError("anchor too close to the image border for this window");
  }
}

CheckResult ratio_or_abs_check(std::string name, double estimate, double target,
                               double rel_tol, double abs_tol) {
  CheckResult c;
  c.name = std::move(name);
  c.estimate = estimate;
  c.target = target;
  if (target != 0.0) {
    c.ratio_check = true;
    c.tolerance = rel_tol;
    c.pass = std::abs(estimate / target - 1.0) <= rel_tol;
  } else {
    c.ratio_check = false;
    c.tolerance = abs_tol;
    c.pass = std::abs(estimate - target) <= abs_tol;
  }
  return c;
}

}  // namespace

VerifyReport verify_clt(const Region& region, int T, int replicates,
                        const NoiseModel& noise, std::uint64_t seed, int threads) {
  if (replicates < 200) throw ConfigError("clt verification needs >= 200 replicates");
  const OffsetMask mask = build_membership_mask(region.contains, region.radius_bound, T);
  if (mask.offsets.empty()) throw ConfigError("region rasterizes to no pixels");
  const int center = T / 2;
  require_anchor_fits(mask, T, center, center);

  std::vector<double> xs(replicates);
  parallel_for(replicates, threads, [&](std::int64_t r) {
    const GrayField field = generate_noise(noise, T, seed, static_cast<std::uint64_t>(r));
    xs[r] = mask_sum(field, mask, center, center) / T;
  });

  const SampleMoments m = sample_moments(xs);
  // Same accumulation path as the covariance check, so the two agree
  // bit-for-bit on identical replicate streams.
  const double variance = sample_covariance(xs, xs);
  const double sigma2 = long_run_variance(noise);
  const double target_var = sigma2 * region.area;
  const double n = static_cast<double>(replicates);

  VerifyReport report;
  report.title = "clt:" + region.name + ":" + noise.tag();
  CheckResult mean_check;
  mean_check.name = "mean";
  mean_check.estimate = m.mean;
  mean_check.target = 0.0;
  mean_check.tolerance = 4.0 * std::sqrt(variance / n);
  mean_check.pass = std::abs(m.mean) <= mean_check.tolerance;
  report.checks.push_back(mean_check);

  report.checks.push_back(ratio_or_abs_check("variance", variance, target_var,
                                             5.0 * std::sqrt(2.0 / n), 0.0));

  CheckResult skew;
  skew.name = "skewness";
  skew.estimate = m.skewness;
  skew.tolerance = 0.3;
  skew.pass = std::abs(m.skewness) <= 0.3;
  report.checks.push_back(skew);

  CheckResult kurt;
  kurt.name = "excess_kurtosis";
  kurt.estimate = m.excess_kurtosis;
  kurt.tolerance = 0.6;
  kurt.pass = std::abs(m.excess_kurtosis) <= 0.6;
  report.checks.push_back(kurt);
  return report;
}

AreaEstimate area_intersection_estimate(const std::function<bool(Vec2)>& a,
                                        const std::function<bool(Vec2)>& b,
                                        double box_half_width, double perimeter_sum,
                                        int resolution) {
  if (resolution < 100) throw ConfigError("area estimate needs resolution >= 100");
  const double side = 2.0 * box_half_width;
  const double step = side / resolution;
  long long count = 0;
  for (int i = 0; i < resolution; ++i) {
    const double x = -box_half_width + (i + 0.5) * step;
    for (int j = 0; j < resolution; ++j) {
      const double y = -box_half_width + (j + 0.5) * step;
      const Vec2 p{x, y};
      if (a(p) && b(p)) ++count;
    }
  }
  AreaEstimate est;
  est.count = count;
  est.area = static_cast<double>(count) / resolution / resolution * side * side;
  est.error_bound = 3.0 * perimeter_sum * side / resolution;
  return est;
}

VerifyReport verify_covariance(const std::vector<CovariancePair>& pairs, int T,
                               int replicates, const NoiseModel& noise,
                               std::uint64_t seed, int threads) {
  VerifyReport report;
  report.title = "covariance:" + noise.tag();
  const double sigma2 = long_run_variance(noise);
  const double n = static_cast<double>(replicates);

  for (const CovariancePair& pair : pairs) {
    const OffsetMask mask_a =
        build_membership_mask(pair.region_a.contains, pair.region_a.radius_bound, T);
    const OffsetMask mask_b =
        build_membership_mask(pair.region_b.contains, pair.region_b.radius_bound, T);
    if (mask_a.offsets.empty() || mask_b.offsets.empty()) {
      throw ConfigError("region rasterizes to no pixels");
    }
    require_anchor_fits(mask_a, T, pair.anchor_a_row, pair.anchor_a_col);
    require_anchor_fits(mask_b, T, pair.anchor_b_row, pair.anchor_b_col);

    std::vector<double> xs(replicates), ys(replicates);
    parallel_for(replicates, threads, [&](std::int64_t r) {
      const GrayField field = generate_noise(noise, T, seed, static_cast<std::uint64_t>(r));
      xs[r] = mask_sum(field, mask_a, pair.anchor_a_row, pair.anchor_a_col) / T;
      ys[r] = mask_sum(field, mask_b, pair.anchor_b_row, pair.anchor_b_col) / T;
    });

    // Intersection of the shifted regions, expressed relative to anchor a.
    const double shift_r =
        static_cast<double>(pair.anchor_b_row - pair.anchor_a_row) / T;
    const double shift_c =
        static_cast<double>(pair.anchor_b_col - pair.anchor_a_col) / T;
    const auto b_shifted = [&pair, shift_r, shift_c](Vec2 p) {
      return pair.region_b.contains(Vec2{p.x - shift_r, p.y - shift_c});
    };
    const double box = pair.region_a.radius_bound + pair.region_b.radius_bound +
                       std::abs(shift_r) + std::abs(shift_c);
    const AreaEstimate inter = area_intersection_estimate(
        pair.region_a.contains, b_shifted, box,
        pair.region_a.perimeter + pair.region_b.perimeter, 800);

    const double target = sigma2 * inter.area;
    const double cov = sample_covariance(xs, ys);
    const SampleMoments ma = sample_moments(xs);
    const SampleMoments mb = sample_moments(ys);
    const double cov_se = std::sqrt((ma.variance * mb.variance + cov * cov) / n);
    report.checks.push_back(ratio_or_abs_check(pair.name, cov, target,
                                               5.0 * std::sqrt(2.0 / n), 3.0 * cov_se));
  }
  return report;
}

VerifyReport verify_normalization_equiv(const Region& region, const std::vector<int>& Ts,
                                        int replicates, const NoiseModel& noise,
                                        std::uint64_t seed, int threads) {
  if (Ts.size() < 2) throw ConfigError("normalization check needs at least two sizes");
  for (std::size_t i = 1; i < Ts.size(); ++i) {
    if (Ts[i] <= Ts[i - 1]) throw ConfigError("T list must be increasing");
  }
  VerifyReport report;
  report.title = "normalization:" + region.name + ":" + noise.tag();

  std::vector<double> gaps(Ts.size(), 0.0);
  for (std::size_t ti = 0; ti < Ts.size(); ++ti) {
    const int T = Ts[ti];
    const OffsetMask mask = build_membership_mask(region.contains, region.radius_bound, T);
    if (mask.offsets.empty()) throw ConfigError("region rasterizes to no pixels");
    std::vector<const OffsetMask*> masks{&mask};
    const AnchorRect anchors =
        valid_anchor_pixels(std::span<const OffsetMask* const>(masks), T);
    const double count_norm = static_cast<double>(T) / static_cast<double>(mask.count());
    const double area_norm = 1.0 / (T * region.area);

    std::vector<double> worst(replicates, 0.0);
    parallel_for(replicates, threads, [&](std::int64_t r) {
      const GrayField field = generate_noise(noise, T, seed, static_cast<std::uint64_t>(r));
      double max_gap = 0.0;
      for (int row = anchors.row_lo; row <= anchors.row_hi; ++row) {
        for (int col = anchors.col_lo; col <= anchors.col_hi; ++col) {
          const double s = mask_sum(field, mask, row, col);
          max_gap = std::max(max_gap, std::abs(s * count_norm - s * area_norm));
        }
      }
      worst[r] = max_gap;
    });
    double mean = 0.0;
    for (double w : worst) mean += w;
    gaps[ti] = mean / replicates;
  }

  for (std::size_t i = 1; i < gaps.size(); ++i) {
    CheckResult c;
    c.name = "gap_T" + std::to_string(Ts[i - 1]) + "_to_T" + std::to_string(Ts[i]);
    c.estimate = gaps[i];
    c.target = gaps[i - 1];
    c.tolerance = 0.2;
    c.ratio_check = true;
    c.pass = gaps[i] <= 1.2 * gaps[i - 1];
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace fisscan
