#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace fisscan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Scan window: a circle of diameter d split by an inner strip of width h,
// both in rescaled units of the unit square.
struct WindowSpec {
  double d = 0.1;
  double h = 0.02;

  void validate() const;  // requires 0 < h < d < 1
};

// The five segments of the split circle: the inner strip, the two circle
// segments on either side of it, and the two half disks left/right of the
// strip axis. Points on the axis (u == 0) belong to neither half disk, so the
// two half-disk pixel masks are mirror images of each other; points with
// |u| == h/2 belong to the inner strip.
enum class Segment { Inner = 1, Upper = 2, Lower = 3, HalfPos = 4, HalfNeg = 5 };

const char* segment_name(Segment seg);

// Pixel offset relative to a window anchor, in grid steps.
struct Offset {
  int dr = 0;
  int dc = 0;
};

// Rasterized scan-window segment at resolution T: the set of integer offsets
// o with o/T inside the segment centered at the origin. Reusable at every
// anchor because the grid sets are translation invariant.
struct OffsetMask {
  Segment segment = Segment::Inner;
  double angle = 0.0;
  int resolution = 0;
  std::vector<Offset> offsets;  // ascending (dr, dc) order
  Offset lo;                    // componentwise minimum over offsets
  Offset hi;                    // componentwise maximum over offsets

  std::size_t count() const { return offsets.size(); }
};

// Rectangular anomaly in rescaled coordinates: a rectangle of given length
// and width, rotated by `angle` against the first axis, centered at `center`,
// lowering the mean gray value by `amplitude` inside it.
struct RectAnomaly {
  Vec2 center{0.5, 0.5};
  double length = 0.1;
  double width = 0.01;
  double angle = 0.0;      // radians in [0, pi)
  double amplitude = 0.0;  // depth of the gray-value dip, >= 0
};

// Rectangle of valid anchor pixels, 1-based inclusive bounds.
struct AnchorRect {
  int row_lo = 1;
  int row_hi = 0;
  int col_lo = 1;
  int col_hi = 0;

  bool empty() const { return row_hi < row_lo || col_hi < col_lo; }
  bool contains(int row, int col) const {
    return row >= row_lo && row <= row_hi && col >= col_lo && col <= col_hi;
  }
  long long count() const {
    if (empty()) return 0;
    return static_cast<long long>(row_hi - row_lo + 1) * (col_hi - col_lo + 1);
  }
};

// Membership of a point (relative to the window center) in one segment.
// The signed perpendicular coordinate is u = -x*sin(angle) + y*cos(angle).
// Throws std::domain_error for angles outside [0, pi).
bool segment_contains(const WindowSpec& spec, Segment seg, double angle, Vec2 x);

bool disk_contains(const WindowSpec& spec, Vec2 x);

bool rect_contains(const RectAnomaly& rect, Vec2 x);

// Rasterizes one segment to its offset mask. Requires T*h >= 2 so the inner
// strip is at least about two pixels wide; throws ConfigError when the mask
// comes out empty.
OffsetMask build_offset_mask(const WindowSpec& spec, Segment seg, double angle, int T);

// Rasterizes an arbitrary membership function whose support lies within
// radius_bound of the origin.
OffsetMask build_membership_mask(const std::function<bool(Vec2)>& contains,
                                 double radius_bound, int T);

// Closed-form Lebesgue measure of a segment; independent of the angle.
double exact_area(const WindowSpec& spec, Segment seg);
double disk_area(const WindowSpec& spec);

// Anchors whose full window (union of all masks) lies inside {1..T}^2.
// Throws ConfigError when the window does not fit anywhere in the image.
AnchorRect valid_anchor_pixels(std::span<const OffsetMask* const> masks, int T);
AnchorRect valid_anchor_pixels(const std::vector<OffsetMask>& masks, int T);

// Membership in the gamma-fattening of a segment (all points within sup-norm
// distance gamma of it), implemented by dense candidate search at step
// gamma/100.
bool fattening_contains(const WindowSpec& spec, Segment seg, double angle,
                        double gamma, Vec2 x);

// Debug text format: header "segment angle T count", then one "o1 o2" pair
// per line.
void write_mask_text(std::ostream& os, const OffsetMask& mask);

}  // namespace fisscan
