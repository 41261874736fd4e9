#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "swerve/raycast.hpp"
#include "swerve/rng.hpp"

using namespace swerve;

namespace {

SceneGeometry empty_scene() {
  SceneGeometry s;
  s.name = "empty";
  return s;
}

}  // namespace

TEST_CASE("empty scene: every ray reads 1.0") {
  VehicleState ego;
  const DepthScan scan = cast_rays(ego, empty_scene(), {}, 10.0);
  for (double r : scan.ranges) CHECK(r == 1.0);
}

TEST_CASE("ray angle convention: index 0 at -45 deg, index 169 at +45 deg") {
  CHECK(DepthScan::ray_angle_offset(0) == Catch::Approx(-std::numbers::pi / 4));
  CHECK(DepthScan::ray_angle_offset(kScanRays - 1) == Catch::Approx(std::numbers::pi / 4));
  // uniform increments
  const double inc = DepthScan::ray_angle_offset(1) - DepthScan::ray_angle_offset(0);
  for (int i = 1; i < kScanRays; ++i) {
    CHECK(DepthScan::ray_angle_offset(i) - DepthScan::ray_angle_offset(i - 1) ==
          Catch::Approx(inc).margin(1e-12));
  }
}

TEST_CASE("perpendicular wall: every ray matches analytic secant scaling") {
  SceneGeometry scene = empty_scene();
  const double d = 4.0, max_range = 10.0;
  scene.boundary_segments.push_back({{d, -50.0}, {d, 50.0}});
  VehicleState ego;  // at origin, heading +x
  const DepthScan scan = cast_rays(ego, scene, {}, max_range);
  for (int i = 0; i < kScanRays; ++i) {
    const double theta = DepthScan::ray_angle_offset(i);
    const double expected = d / std::cos(theta) / max_range;
    REQUIRE(scan.ranges[i] == Catch::Approx(expected).margin(1e-9));
  }
  // center rays (the two nearest 0 deg, 85 by convention) read ~ d/max_range;
  // with 170 rays no ray lies exactly on the heading, so the residual is the
  // secant of the half-increment
  CHECK(scan.ranges[85] == Catch::Approx(d / max_range).margin(1e-4));
  CHECK(scan.ranges[85] == scan.ranges[84]);
}

TEST_CASE("obstacle dead ahead subtends the analytic ray block") {
  const double d = 5.0, max_range = 10.0;
  const Footprint fp{0.25, 0.15};
  VehicleState obs;
  obs.x = d + fp.half_length;  // near face exactly at distance d
  VehicleState ego;
  const DepthScan scan = cast_rays(ego, empty_scene(), {{obs, fp}}, max_range);

  int hits = 0;
  bool in_block = false, block_ended = false;
  for (int i = 0; i < kScanRays; ++i) {
    if (scan.ranges[i] < 1.0) {
      hits += 1;
      if (block_ended) FAIL("hit block not contiguous");
      in_block = true;
    } else if (in_block) {
      block_ended = true;
    }
  }
  const double half_angle = std::atan((fp.half_width) / d);
  const double inc = std::numbers::pi / 2.0 / (kScanRays - 1);
  const double expected_rays = 2.0 * half_angle / inc;
  CHECK(std::abs(hits - expected_rays) <= 1.0 + 1e-9);
  // the nearest hit is the face distance
  double nearest = 1.0;
  for (double r : scan.ranges) nearest = std::min(nearest, r);
  CHECK(nearest == Catch::Approx(d / max_range).margin(1e-4));
}

TEST_CASE("rigid-motion equivariance of the scan") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    SceneGeometry scene = empty_scene();
    for (int i = 0; i < 6; ++i) {
      scene.boundary_segments.push_back({{rng.uniform(-8, 8), rng.uniform(-8, 8)},
                                         {rng.uniform(-8, 8), rng.uniform(-8, 8)}});
    }
    VehicleState ego;
    ego.x = rng.uniform(-2, 2);
    ego.y = rng.uniform(-2, 2);
    ego.yaw = rng.uniform(-3, 3);
    VehicleState other;
    other.x = rng.uniform(-6, 6);
    other.y = rng.uniform(-6, 6);
    other.yaw = rng.uniform(-3, 3);
    const Footprint fp{0.3, 0.2};

    const DepthScan base = cast_rays(ego, scene, {{other, fp}}, 10.0);

    const double phi = rng.uniform(-3, 3);
    const Vec2 shift{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    auto xform = [&](const Vec2& p) { return rotate(p, phi) + shift; };
    SceneGeometry moved = empty_scene();
    for (const Segment& s : scene.boundary_segments) {
      moved.boundary_segments.push_back({xform(s.a), xform(s.b)});
    }
    auto move_state = [&](const VehicleState& s) {
      VehicleState out = s;
      const Vec2 p = xform({s.x, s.y});
      out.x = p.x;
      out.y = p.y;
      out.yaw = wrap_angle(s.yaw + phi);
      return out;
    };
    const DepthScan scan2 = cast_rays(move_state(ego), moved, {{move_state(other), fp}}, 10.0);
    for (int i = 0; i < kScanRays; ++i) {
      REQUIRE(scan2.ranges[i] == Catch::Approx(base.ranges[i]).margin(1e-9));
    }
  }
}

TEST_CASE("shape_scan: identity for clean full-resolution frontal input") {
  const double max_range = 10.0;
  const std::size_t n = 680;  // 360 deg at 680 entries
  std::vector<double> raw(n, 3.0);
  const DepthScan scan = shape_scan(raw, 0, max_range);
  for (double r : scan.ranges) CHECK(r == Catch::Approx(0.3));
}

TEST_CASE("shape_scan: zero dropout replaced by neighbor midpoint") {
  // 680 raw entries over 360 deg puts exactly 170 in the frontal sector, so
  // downsampling is the identity and positions can be asserted directly.
  const std::size_t n = 680;
  std::vector<double> raw(n, 5.0);
  raw[10] = 2.0;
  raw[11] = 0.0;  // dropout
  raw[12] = 2.2;
  const DepthScan scan = shape_scan(raw, 0, 10.0);
  // sector order is ascending angle: raw indices 595..679 first (85 entries),
  // then 0..84; raw[11] therefore lands at scan index 96
  CHECK(scan.ranges[95] == Catch::Approx(0.20));
  CHECK(scan.ranges[96] == Catch::Approx(0.21));
  CHECK(scan.ranges[97] == Catch::Approx(0.22));
}

TEST_CASE("shape_scan: 680 frontal entries select every 4th") {
  // full circle of 4 x 680 entries -> the 90-degree sector holds exactly 680
  const std::size_t n = 2720;
  std::vector<double> raw(n);
  for (std::size_t k = 0; k < n; ++k) raw[k] = 1.0 + static_cast<double>(k % 997) * 0.005;
  const std::size_t h = 400;  // arbitrary heading index
  const DepthScan scan = shape_scan(raw, h, 10.0);

  // oracle by plain index arithmetic: sector starts 45 degrees to the right
  // of the heading (h - n/8 modulo n) and the stride is 4
  const std::size_t sector_start = (h + n - n / 8) % n;
  for (int j = 0; j < kScanRays; ++j) {
    const std::size_t src = (sector_start + 4 * static_cast<std::size_t>(j)) % n;
    REQUIRE(scan.ranges[j] == Catch::Approx(raw[src] / 10.0));
  }
}

TEST_CASE("shape_scan: unusable sector raises, junk still yields valid scans") {
  std::vector<double> all_zero(360, 0.0);
  CHECK_THROWS_WITH(shape_scan(all_zero, 0, 10.0),
                    Catch::Matchers::ContainsSubstring("no valid readings"));
  CHECK_THROWS(shape_scan({}, 0, 10.0));

  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> raw(17 + rng.uniform_index(900));
    bool any_valid = false;
    for (double& v : raw) {
      const double roll = rng.uniform();
      if (roll < 0.2) {
        v = 0.0;
      } else if (roll < 0.3) {
        v = rng.uniform(10.5, 100.0);  // beyond range
      } else if (roll < 0.35) {
        v = rng.uniform(50.0, 200.0);  // spike fodder
      } else {
        v = rng.uniform(0.2, 9.9);
      }
    }
    const std::size_t h = rng.uniform_index(raw.size());
    DepthScan scan;
    try {
      scan = shape_scan(raw, h, 10.0);
    } catch (const std::runtime_error&) {
      continue;  // sector may legitimately have no valid readings
    }
    any_valid = true;
    for (double r : scan.ranges) {
      REQUIRE(r >= 0.0);
      REQUIRE(r <= 1.0);
      REQUIRE(std::isfinite(r));
    }
    (void)any_valid;
  }
}

TEST_CASE("shape_scan: isolated spike filtered") {
  std::vector<double> raw(680, 2.0);
  raw[5] = 7.5;  // more than 3x both neighbors
  const DepthScan scan = shape_scan(raw, 0, 10.0);
  for (double r : scan.ranges) CHECK(r == Catch::Approx(0.2));
}
