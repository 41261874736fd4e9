#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "swerve/agents.hpp"
#include "swerve/scene.hpp"

using namespace swerve;

namespace {

// straight open centerline along +x for controller geometry checks
SceneGeometry straight_scene(double len = 200.0, double hw = 2.0) {
  SceneGeometry s;
  s.name = "straight";
  s.centerline_closed = false;
  for (int i = 0; i <= 200; ++i) {
    s.track_centerline.push_back({{len * i / 200.0, 0.0}, hw});
  }
  s.spawn_poses.push_back({"start", {0.0, 0.0}, 0.0});
  return s;
}

// closed circular centerline of radius R
SceneGeometry circle_scene(double radius, int n = 256) {
  SceneGeometry s;
  s.name = "circle";
  s.centerline_closed = true;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    s.track_centerline.push_back({{radius * std::cos(a), radius * std::sin(a)}, 2.0});
  }
  s.spawn_poses.push_back({"start", {radius, 0.0}, std::numbers::pi / 2.0});
  return s;
}

}  // namespace

TEST_CASE("pure pursuit on a straight line") {
  const SceneGeometry scene = straight_scene();
  const TrackRef track(scene);
  const VehicleParams params;
  ObstacleController ctrl;

  VehicleState on_line;
  on_line.x = 10.0;
  on_line.v = 2.0;
  auto [t0, s0] = obstacle_control(ctrl, on_line, track, params);
  CHECK(std::abs(s0) < 1e-6);
  CHECK(t0 > 0.0);

  // offset 0.2 m to the left of the line -> steers right (negative)
  VehicleState left = on_line;
  left.y = 0.2;
  auto [t1, s1] = obstacle_control(ctrl, left, track, params);
  CHECK(s1 < 0.0);
  (void)t1;

  // offset right -> steers left
  VehicleState right = on_line;
  right.y = -0.2;
  auto [t2, s2] = obstacle_control(ctrl, right, track, params);
  CHECK(s2 > 0.0);
  (void)t2;
}

TEST_CASE("steady-state steer on a circular track approaches atan(L/R)") {
  const double radius = 6.0;
  const SceneGeometry scene = circle_scene(radius);
  const TrackRef track(scene);
  VehicleParams params;
  ObstacleController ctrl;
  ctrl.target_speed_scale = 0.5;

  VehicleState s;
  s.x = radius;
  s.y = 0.0;
  s.yaw = std::numbers::pi / 2.0;
  s.v = 1.0;
  ctrl.centerline_progress = track.project(s.position());
  for (int i = 0; i < 4000; ++i) {
    const auto [throttle, steer] = obstacle_control(ctrl, s, track, params);
    s = step_dynamics(s, throttle, steer, params);
  }
  const double expected = std::atan(params.wheelbase / radius);
  CHECK(s.steer == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("missing centerline is a configuration error") {
  const SceneGeometry scene = make_intersection_scene();
  CHECK_THROWS_WITH(TrackRef(scene), Catch::Matchers::ContainsSubstring("centerline"));
}

TEST_CASE("follower laps the bundled racetrack without boundary contact") {
  const SceneGeometry scene = make_racetrack_scene();
  const TrackRef track(scene);
  VehicleParams params;
  ObstacleController ctrl;
  ctrl.target_speed_scale = 0.8;
  const Footprint fp;

  VehicleState s;
  s.x = scene.track_centerline[0].p.x;
  s.y = scene.track_centerline[0].p.y;
  s.yaw = scene.spawn_poses[0].yaw;
  ctrl.centerline_progress = 0.0;

  double traveled = 0.0;
  double prev_s = 0.0;
  int steps = 0;
  const int step_cap = 200000;
  while (traveled < track.length() + 1.0 && steps < step_cap) {
    const auto [throttle, steer] = obstacle_control(ctrl, s, track, params);
    s = step_dynamics(s, throttle, steer, params);
    double ds = ctrl.centerline_progress - prev_s;
    if (ds < -track.length() / 2) ds += track.length();  // wrapped past the origin
    traveled += std::max(ds, 0.0);
    prev_s = ctrl.centerline_progress;
    ++steps;
    REQUIRE_FALSE(off_track(s, scene));
    const OrientedBox box = footprint_box(s, fp);
    for (const Segment& b : scene.boundary_segments) {
      if (distance(s.position(), closest_point_on_segment(s.position(), b)) < 1.0) {
        REQUIRE_FALSE(box_segment_intersect(box, b));
      }
    }
  }
  CHECK(traveled >= track.length());  // completed a lap
  CHECK(steps < step_cap);
}

TEST_CASE("spawn: counts, determinism, clearance, heading modes") {
  const SceneGeometry scene = make_racetrack_scene();
  const TrackRef track(scene);
  const VehicleParams base;
  SpawnConfig cfg;
  cfg.n_obstacles = 15;

  const SpawnResult a = spawn_training_scene(HeadingMode::Default, cfg, scene, track, base, 42);
  REQUIRE(a.obstacles.size() == 15);
  REQUIRE(a.controllers.size() == 15);

  // determinism
  const SpawnResult b = spawn_training_scene(HeadingMode::Default, cfg, scene, track, base, 42);
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
    CHECK(a.obstacles[i].x == b.obstacles[i].x);
    CHECK(a.obstacles[i].yaw == b.obstacles[i].yaw);
  }
  CHECK(a.ego.x == b.ego.x);

  // no pair of footprints overlaps at t = 0 (ego included)
  std::vector<VehicleState> all = a.obstacles;
  all.push_back(a.ego);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      CHECK_FALSE(detect_collision(all[i], cfg.footprint, all[j], cfg.footprint));
    }
  }

  // ego speed advantage over the obstacle top speed
  CHECK(a.ego_params.max_speed ==
        Catch::Approx(cfg.speed_advantage * base.max_speed * cfg.target_speed_scale));

  // default mode: ego yaw aligned with the spawn pose tangent
  bool matched = false;
  for (const SpawnPose& pose : scene.spawn_poses) {
    if (std::abs(pose.p.x - a.ego.x) < 1e-9 && std::abs(pose.p.y - a.ego.y) < 1e-9) {
      matched = true;
      CHECK(std::abs(wrap_angle(a.ego.yaw - pose.yaw)) < 1e-6);
    }
  }
  CHECK(matched);

  // reversed mode at the same seed: yaw differs by pi
  const SpawnResult r = spawn_training_scene(HeadingMode::Reversed, cfg, scene, track, base, 42);
  CHECK(std::abs(std::abs(wrap_angle(r.ego.yaw - a.ego.yaw)) - std::numbers::pi) < 1e-6);

  // obstacles all head along the track tangent
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
    const auto sample = track.sample(track.project(a.obstacles[i].position()));
    const double tangent_yaw = std::atan2(sample.tangent.y, sample.tangent.x);
    CHECK(std::abs(wrap_angle(a.obstacles[i].yaw - tangent_yaw)) < 0.2);
  }
}

TEST_CASE("spawn: zero obstacles and overcrowding") {
  const SceneGeometry scene = make_racetrack_scene();
  const TrackRef track(scene);
  const VehicleParams base;
  SpawnConfig cfg;
  cfg.n_obstacles = 0;
  const SpawnResult only_ego = spawn_training_scene(HeadingMode::Default, cfg, scene, track, base, 1);
  CHECK(only_ego.obstacles.empty());

  cfg.n_obstacles = 100000;
  CHECK_THROWS_WITH(spawn_training_scene(HeadingMode::Default, cfg, scene, track, base, 1),
                    Catch::Matchers::ContainsSubstring("non-overlapping"));
}
