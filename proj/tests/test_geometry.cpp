#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "swerve/geometry.hpp"
#include "swerve/rng.hpp"

using namespace swerve;

namespace {

// Independent overlap oracle: dense point sampling inside box a, testing
// containment in box b (and vice versa). Resolution bounds the error, which
// is why disagreements are only checked where penetration/clearance is
// clearly above the sampling scale.
bool overlap_by_sampling(const OrientedBox& a, const OrientedBox& b, int n = 120) {
  auto sample_in = [&](const OrientedBox& box, const OrientedBox& other) {
    const Vec2 fwd = {std::cos(box.yaw), std::sin(box.yaw)};
    const Vec2 left = perp_left(fwd);
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double u = -box.half_length + 2.0 * box.half_length * i / n;
        const double v = -box.half_width + 2.0 * box.half_width * j / n;
        const Vec2 p = box.center + fwd * u + left * v;
        if (point_in_box(p, other)) return true;
      }
    }
    return false;
  };
  return sample_in(a, b) || sample_in(b, a);
}

// Signed separation estimate: positive = clearance, negative = penetration.
// Uses the SAT gap over the four box axes, which is exact for OBB pairs that
// separate on a face axis and an upper bound on penetration otherwise.
double sat_gap(const OrientedBox& a, const OrientedBox& b) {
  double max_gap = -1e9;
  const Vec2 axes[4] = {{std::cos(a.yaw), std::sin(a.yaw)},
                        perp_left(Vec2{std::cos(a.yaw), std::sin(a.yaw)}),
                        {std::cos(b.yaw), std::sin(b.yaw)},
                        perp_left(Vec2{std::cos(b.yaw), std::sin(b.yaw)})};
  for (const Vec2& axis : axes) {
    double alo = 1e18, ahi = -1e18, blo = 1e18, bhi = -1e18;
    for (const Vec2& c : a.corners()) {
      alo = std::min(alo, dot(c, axis));
      ahi = std::max(ahi, dot(c, axis));
    }
    for (const Vec2& c : b.corners()) {
      blo = std::min(blo, dot(c, axis));
      bhi = std::max(bhi, dot(c, axis));
    }
    max_gap = std::max(max_gap, std::max(blo - ahi, alo - bhi));
  }
  return max_gap;
}

}  // namespace

TEST_CASE("ray-segment intersection basics") {
  const Segment wall{{2.0, -1.0}, {2.0, 1.0}};
  const auto hit = ray_segment_hit({0.0, 0.0}, {1.0, 0.0}, wall);
  REQUIRE(hit.has_value());
  CHECK(*hit == Catch::Approx(2.0).margin(1e-12));

  CHECK_FALSE(ray_segment_hit({0.0, 0.0}, {-1.0, 0.0}, wall).has_value());  // behind
  CHECK_FALSE(ray_segment_hit({0.0, 5.0}, {1.0, 0.0}, wall).has_value());   // misses extent

  // oblique hit, checked against the analytic solution
  const Segment slanted{{3.0, 0.0}, {0.0, 3.0}};
  const double ang = std::numbers::pi / 6.0;
  const auto oblique = ray_segment_hit({0.0, 0.0}, {std::cos(ang), std::sin(ang)}, slanted);
  REQUIRE(oblique.has_value());
  // line x + y = 3 -> t (cos + sin) = 3
  CHECK(*oblique == Catch::Approx(3.0 / (std::cos(ang) + std::sin(ang))).margin(1e-12));
}

TEST_CASE("point-segment distance") {
  const Segment s{{0.0, 0.0}, {4.0, 0.0}};
  CHECK(point_segment_distance({2.0, 3.0}, s) == Catch::Approx(3.0));
  CHECK(point_segment_distance({-3.0, 4.0}, s) == Catch::Approx(5.0));  // endpoint region
  CHECK(point_segment_distance({1.0, 0.0}, s) == Catch::Approx(0.0));
}

TEST_CASE("point in convex polygon: boundary counts as inside") {
  const Polygon square{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
  CHECK(point_in_convex_polygon({1.0, 1.0}, square));
  CHECK(point_in_convex_polygon({2.0, 1.0}, square));  // edge
  CHECK(point_in_convex_polygon({0.0, 0.0}, square));  // corner
  CHECK_FALSE(point_in_convex_polygon({2.1, 1.0}, square));
  // clockwise winding also accepted
  const Polygon cw{{{0, 0}, {0, 2}, {2, 2}, {2, 0}}};
  CHECK(point_in_convex_polygon({1.0, 1.0}, cw));
}

TEST_CASE("box overlap: identical and separated poses") {
  const OrientedBox a{{0, 0}, 0.3, 0.25, 0.15};
  CHECK(boxes_overlap(a, a));

  OrientedBox b = a;
  b.yaw = a.yaw;
  // lateral offset just beyond touching for same-heading boxes
  const Vec2 left = perp_left(Vec2{std::cos(a.yaw), std::sin(a.yaw)});
  b.center = a.center + left * (2.0 * a.half_width + 0.01);
  CHECK_FALSE(boxes_overlap(a, b));
}

TEST_CASE("45-degree corner contact agrees with sampling oracle") {
  // Axis-aligned unit-ish box and a 45-degree box whose corner just reaches in
  const OrientedBox a{{0, 0}, 0.0, 0.5, 0.5};
  const double diag = 0.5 * std::numbers::sqrt2;  // corner reach of the rotated box
  OrientedBox b{{0.5 + diag - 0.02, 0.0}, std::numbers::pi / 4.0, 0.5, 0.5};
  CHECK(boxes_overlap(a, b));
  CHECK(overlap_by_sampling(a, b));
  b.center.x = 0.5 + diag + 0.02;
  CHECK_FALSE(boxes_overlap(a, b));
  CHECK_FALSE(overlap_by_sampling(a, b));
}

TEST_CASE("SAT agrees with point-sampling oracle on random pairs") {
  Rng rng(2024);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    OrientedBox a{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                  rng.uniform(-std::numbers::pi, std::numbers::pi),
                  rng.uniform(0.1, 0.5),
                  rng.uniform(0.1, 0.4)};
    OrientedBox b{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                  rng.uniform(-std::numbers::pi, std::numbers::pi),
                  rng.uniform(0.1, 0.5),
                  rng.uniform(0.1, 0.4)};
    // only judge pairs with clearance or penetration above 1 mm, where the
    // sampling oracle is reliable
    if (std::abs(sat_gap(a, b)) < 1e-3) continue;
    ++checked;
    CHECK(boxes_overlap(a, b) == overlap_by_sampling(a, b));
    CHECK(boxes_overlap(a, b) == boxes_overlap(b, a));  // symmetry
  }
  CHECK(checked > 800);
}

TEST_CASE("box-segment intersection") {
  const OrientedBox box{{0, 0}, 0.0, 1.0, 0.5};
  CHECK(box_segment_intersect(box, {{-2, 0}, {2, 0}}));    // crossing
  CHECK(box_segment_intersect(box, {{0.0, 0.0}, {3, 3}})); // starts inside
  CHECK_FALSE(box_segment_intersect(box, {{-2, 1.0}, {2, 1.0}}));  // parallel above
  CHECK_FALSE(box_segment_intersect(box, {{2.0, 2.0}, {3.0, 0.0}}));
}
