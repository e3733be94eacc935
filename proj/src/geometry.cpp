#include "fisscan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fisscan/errors.hpp"

namespace fisscan {

namespace {

void check_angle(double angle) {
  if (!(angle >= 0.0 && angle < std::numbers::pi)) {
    throw std::domain_error("segment angle must lie in [0, pi)");
  }
}

}  // namespace

void WindowSpec::validate() const {
  if (!(0.0 < h && h < d && d < 1.0)) {
    throw std::domain_error("window spec requires 0 < h < d < 1");
  }
}

const char* segment_name(Segment seg) {
  switch (seg) {
    case Segment::Inner:
      return "inner";
    case Segment::Upper:
      return "upper";
    case Segment::Lower:
      return "lower";
    case Segment::HalfPos:
      return "halfpos";
    case Segment::HalfNeg:
      return "halfneg";
  }
  return "?";
}

bool disk_contains(const WindowSpec& spec, Vec2 x) {
  const double r = spec.d / 2.0;
  return x.x * x.x + x.y * x.y <= r * r;
}

bool segment_contains(const WindowSpec& spec, Segment seg, double angle, Vec2 x) {
  check_angle(angle);
  if (!disk_contains(spec, x)) return false;
  const double u = -x.x * std::sin(angle) + x.y * std::cos(angle);
  const double c = spec.h / 2.0;
  switch (seg) {
    case Segment::Inner:
      return std::abs(u) <= c;
    case Segment::Upper:
      return u > c;
    case Segment::Lower:
      return u < -c;
    case Segment::HalfPos:
      return u > 0.0;
    case Segment::HalfNeg:
      return u < 0.0;
  }
  return false;
}

bool rect_contains(const RectAnomaly& rect, Vec2 x) {
  const double ca = std::cos(rect.angle);
  const double sa = std::sin(rect.angle);
  const double rx = x.x - rect.center.x;
  const double ry = x.y - rect.center.y;
  const double v = rx * ca + ry * sa;
  const double u = -rx * sa + ry * ca;
  // Boundary points count as inside. Grid positions k/T routinely land on the
  // boundary exactly (in real arithmetic), so a guard far above rounding
  // error but far below any pixel scale keeps those ties from flipping.
  const double tie = 1e-12;
  return std::abs(v) <= rect.length / 2.0 + tie && std::abs(u) <= rect.width / 2.0 + tie;
}

OffsetMask build_membership_mask(const std::function<bool(Vec2)>& contains,
                                 double radius_bound, int T) {
  if (T < 1) throw std::domain_error("grid resolution must be positive");
  OffsetMask mask;
  mask.resolution = T;
  const int reach = static_cast<int>(std::ceil(radius_bound * T)) + 1;
  mask.lo = Offset{reach + 1, reach + 1};
  mask.hi = Offset{-reach - 1, -reach - 1};
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      const Vec2 p{static_cast<double>(dr) / T, static_cast<double>(dc) / T};
      if (!contains(p)) continue;
      mask.offsets.push_back(Offset{dr, dc});
      mask.lo.dr = std::min(mask.lo.dr, dr);
      mask.lo.dc = std::min(mask.lo.dc, dc);
      mask.hi.dr = std::max(mask.hi.dr, dr);
      mask.hi.dc = std::max(mask.hi.dc, dc);
    }
  }
  return mask;
}

OffsetMask build_offset_mask(const WindowSpec& spec, Segment seg, double angle, int T) {
  spec.validate();
  check_angle(angle);
  if (static_cast<double>(T) * spec.h < 2.0) {
    throw ConfigError("window too small for resolution: T*h must be >= 2");
  }
  OffsetMask mask = build_membership_mask(
      [&](Vec2 p) { return segment_contains(spec, seg, angle, p); }, spec.d / 2.0, T);
  mask.segment = seg;
  mask.angle = angle;
  if (mask.offsets.empty()) {
    throw ConfigError(std::string("degenerate window: empty mask for segment ") +
                      segment_name(seg));
  }
  return mask;
}

double disk_area(const WindowSpec& spec) {
  const double r = spec.d / 2.0;
  return std::numbers::pi * r * r;
}

double exact_area(const WindowSpec& spec, Segment seg) {
  spec.validate();
  const double r = spec.d / 2.0;
  const double c = spec.h / 2.0;
  const double disk = std::numbers::pi * r * r;
  const double inner = 2.0 * c * std::sqrt(r * r - c * c) + 2.0 * r * r * std::asin(c / r);
  switch (seg) {
    case Segment::Inner:
      return inner;
    case Segment::Upper:
    case Segment::Lower:
      return (disk - inner) / 2.0;
    case Segment::HalfPos:
    case Segment::HalfNeg:
      return disk / 2.0;
  }
  return 0.0;
}

AnchorRect valid_anchor_pixels(std::span<const OffsetMask* const> masks, int T) {
  if (masks.empty()) throw ConfigError("no masks given for anchor computation");
  Offset lo{0, 0};
  Offset hi{0, 0};
  for (const OffsetMask* m : masks) {
    lo.dr = std::min(lo.dr, m->lo.dr);
    lo.dc = std::min(lo.dc, m->lo.dc);
    hi.dr = std::max(hi.dr, m->hi.dr);
    hi.dc = std::max(hi.dc, m->hi.dc);
  }
  AnchorRect rect;
  rect.row_lo = 1 - lo.dr;
  rect.row_hi = T - hi.dr;
  rect.col_lo = 1 - lo.dc;
  rect.col_hi = T - hi.dc;
  if (rect.empty()) {
    throw ConfigError("window larger than image: no valid anchor pixels");
  }
  return rect;
}

AnchorRect valid_anchor_pixels(const std::vector<OffsetMask>& masks, int T) {
  std::vector<const OffsetMask*> ptrs;
  ptrs.reserve(masks.size());
  for (const auto& m : masks) ptrs.push_back(&m);
  return valid_anchor_pixels(std::span<const OffsetMask* const>(ptrs), T);
}

bool fattening_contains(const WindowSpec& spec, Segment seg, double angle,
                        double gamma, Vec2 x) {
  if (gamma < 0.0) throw std::domain_error("fattening radius must be >= 0");
  if (gamma == 0.0) return segment_contains(spec, seg, angle, x);
  const int steps = 100;
  const double step = gamma / steps;
  for (int i = -steps; i <= steps; ++i) {
    for (int j = -steps; j <= steps; ++j) {
      const Vec2 z{x.x + i * step, x.y + j * step};
      if (segment_contains(spec, seg, angle, z)) return true;
    }
  }
  return false;
}

void write_mask_text(std::ostream& os, const OffsetMask& mask) {
  os << segment_name(mask.segment) << ' ' << mask.angle << ' ' << mask.resolution
     << ' ' << mask.count() << '\n';
  for (const Offset& o : mask.offsets) {
    os << o.dr << ' ' << o.dc << '\n';
  }
}

}  // namespace fisscan
