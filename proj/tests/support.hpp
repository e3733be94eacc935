#pragma once

// Test-only oracles, kept independent of the library's scan implementation:
// membership is re-evaluated per pixel, sums run over a plain row scan, and
// areas come from 1D quadrature of chord lengths instead of closed forms.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fisscan/field.hpp"
#include "fisscan/geometry.hpp"
#include "fisscan/stats.hpp"

namespace oracle {

// Mean over pixels of one segment at an anchor, scaled by T, recomputed from
// scratch via segment_contains.
inline double scaled_mean(const fisscan::GrayField& field, const fisscan::WindowSpec& spec,
                          fisscan::Segment seg, double angle, int row, int col) {
  const int T = field.size();
  const int reach = static_cast<int>(std::ceil(spec.d / 2.0 * T)) + 1;
  double sum = 0.0;
  long long n = 0;
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      const fisscan::Vec2 p{static_cast<double>(dr) / T, static_cast<double>(dc) / T};
      if (!fisscan::segment_contains(spec, seg, angle, p)) continue;
      sum += field.at(row + dr, col + dc);
      ++n;
    }
  }
  if (n == 0) throw std::runtime_error("oracle: empty segment");
  return sum * T / static_cast<double>(n);
}

inline double stat_value(const fisscan::GrayField& field, const fisscan::StatConfig& cfg,
                         double sigma, int row, int col) {
  using fisscan::Segment;
  using fisscan::StatKind;
  double f = -1e300;
  double nb = -1e300;
  for (double angle : cfg.angles) {
    const double inner = scaled_mean(field, cfg.window, Segment::Inner, angle, row, col);
    const double upper = scaled_mean(field, cfg.window, Segment::Upper, angle, row, col);
    const double lower = scaled_mean(field, cfg.window, Segment::Lower, angle, row, col);
    const double s12 = upper - inner;
    const double s13 = lower - inner;
    const bool two_sided = cfg.kind == StatKind::F2 || cfg.kind == StatKind::FnB2;
    f = std::max(f, two_sided ? std::min(std::abs(s12), std::abs(s13))
                              : std::min(s12, s13));
    const double pos = scaled_mean(field, cfg.window, Segment::HalfPos, angle, row, col);
    const double neg = scaled_mean(field, cfg.window, Segment::HalfNeg, angle, row, col);
    nb = std::max(nb, std::abs(pos - neg));
  }
  switch (cfg.kind) {
    case StatKind::F1:
    case StatKind::F2:
      return f / sigma;
    case StatKind::NB:
      return nb / sigma;
    case StatKind::FnB1:
    case StatKind::FnB2:
      return std::max((f - nb) / sigma, 0.0);
  }
  return 0.0;
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol,
                           int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Segment area via quadrature over the perpendicular coordinate: the chord of
// the disk at height u has length 2*sqrt(r^2-u^2), and each segment is a
// u-interval of the disk.
inline double segment_area(const fisscan::WindowSpec& spec, fisscan::Segment seg) {
  const double r = spec.d / 2.0;
  const double c = spec.h / 2.0;
  const auto chord = [r](double u) { return 2.0 * std::sqrt(std::max(r * r - u * u, 0.0)); };
  using fisscan::Segment;
  switch (seg) {
    case Segment::Inner:
      return integrate(chord, -c, c);
    case Segment::Upper:
      return integrate(chord, c, r);
    case Segment::Lower:
      return integrate(chord, -r, -c);
    case Segment::HalfPos:
    case Segment::HalfNeg:
      return integrate(chord, 0.0, r);
  }
  return 0.0;
}

}  // namespace oracle
