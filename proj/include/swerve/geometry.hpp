#pragma once

// Planar geometry primitives: vectors, segments, convex polygons, oriented
// rectangles, and the intersection/distance queries the simulator is built on.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace swerve {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline Vec2 normalized(const Vec2& a) {
  const double n = norm(a);
  return n > 0.0 ? Vec2{a.x / n, a.y / n} : Vec2{0.0, 0.0};
}
inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
// Perpendicular pointing to the left of v.
inline Vec2 perp_left(const Vec2& v) { return {-v.y, v.x}; }

struct Segment {
  Vec2 a;
  Vec2 b;
  double length() const { return distance(a, b); }
};

struct Polygon {
  std::vector<Vec2> pts;  // convex, consistent winding
};

// Distance along the ray (origin + t * dir, t >= 0) to the segment, if any.
// `dir` must be unit length for t to be metric. Parallel rays miss.
inline std::optional<double> ray_segment_hit(const Vec2& origin, const Vec2& dir,
                                             const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 ao = seg.a - origin;
  const double t = cross(ao, e) / denom;
  const double s = cross(ao, dir) / denom;
  if (t < 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

inline Vec2 closest_point_on_segment(const Vec2& p, const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double len2 = dot(e, e);
  if (len2 <= 0.0) return seg.a;
  const double t = std::clamp(dot(p - seg.a, e) / len2, 0.0, 1.0);
  return seg.a + e * t;
}

inline double point_segment_distance(const Vec2& p, const Segment& seg) {
  return distance(p, closest_point_on_segment(p, seg));
}

// Boundary counts as inside. Accepts either winding.
inline bool point_in_convex_polygon(const Vec2& p, const Polygon& poly) {
  const std::size_t n = poly.pts.size();
  if (n < 3) return false;
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.pts[i];
    const Vec2& b = poly.pts[(i + 1) % n];
    const double c = cross(b - a, p - a);
    if (c > 1e-12) has_pos = true;
    if (c < -1e-12) has_neg = true;
    if (has_pos && has_neg) return false;
  }
  return true;
}

// Oriented rectangle (vehicle footprint placed at a pose).
struct OrientedBox {
  Vec2 center;
  double yaw = 0.0;
  double half_length = 0.0;  // along heading
  double half_width = 0.0;   // across heading

  std::array<Vec2, 4> corners() const {
    const Vec2 fwd = {std::cos(yaw), std::sin(yaw)};
    const Vec2 left = perp_left(fwd);
    const Vec2 l = fwd * half_length;
    const Vec2 w = left * half_width;
    return {center + l + w, center + l - w, center - l - w, center - l + w};
  }

  std::array<Segment, 4> edges() const {
    const auto c = corners();
    return {Segment{c[0], c[1]}, Segment{c[1], c[2]}, Segment{c[2], c[3]}, Segment{c[3], c[0]}};
  }
};

namespace detail {
inline void project_box(const OrientedBox& box, const Vec2& axis, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -std::numeric_limits<double>::infinity();
  for (const Vec2& c : box.corners()) {
    const double v = dot(c, axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}
}  // namespace detail

// Separating-axis test; touching boxes count as overlapping.
inline bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const std::array<Vec2, 4> axes = {
      Vec2{std::cos(a.yaw), std::sin(a.yaw)}, perp_left(Vec2{std::cos(a.yaw), std::sin(a.yaw)}),
      Vec2{std::cos(b.yaw), std::sin(b.yaw)}, perp_left(Vec2{std::cos(b.yaw), std::sin(b.yaw)})};
  for (const Vec2& axis : axes) {
    double alo, ahi, blo, bhi;
    detail::project_box(a, axis, alo, ahi);
    detail::project_box(b, axis, blo, bhi);
    if (ahi < blo || bhi < alo) return false;
  }
  return true;
}

inline bool point_in_box(const Vec2& p, const OrientedBox& box) {
  const Vec2 d = p - box.center;
  const Vec2 fwd = {std::cos(box.yaw), std::sin(box.yaw)};
  return std::abs(dot(d, fwd)) <= box.half_length &&
         std::abs(cross(fwd, d)) <= box.half_width;
}

// Segment-vs-box SAT (box axes plus the segment normal).
inline bool box_segment_intersect(const OrientedBox& box, const Segment& seg) {
  const Vec2 fwd = {std::cos(box.yaw), std::sin(box.yaw)};
  const Vec2 left = perp_left(fwd);
  std::vector<Vec2> axes = {fwd, left};
  const Vec2 e = seg.b - seg.a;
  if (norm(e) > 0.0) axes.push_back(normalized(perp_left(e)));
  for (const Vec2& axis : axes) {
    double blo, bhi;
    detail::project_box(box, axis, blo, bhi);
    const double s0 = dot(seg.a, axis), s1 = dot(seg.b, axis);
    const double slo = std::min(s0, s1), shi = std::max(s0, s1);
    if (bhi < slo || shi < blo) return false;
  }
  return true;
}

}  // namespace swerve
