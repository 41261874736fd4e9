#pragma once

// Scripted obstacle traffic: a curvature-aware pure-pursuit follower that laps
// the track centerline, plus spawn logic for the training scene in both the
// default and reversed ego-heading configurations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swerve/dynamics.hpp"
#include "swerve/geometry.hpp"
#include "swerve/rng.hpp"
#include "swerve/scene.hpp"

namespace swerve {

enum class HeadingMode { Default, Reversed };

inline const char* to_string(HeadingMode m) {
  return m == HeadingMode::Default ? "default" : "reversed";
}

// Precomputed arclength/tangent/curvature view of a scene centerline.
class TrackRef {
 public:
  TrackRef() = default;

  explicit TrackRef(const SceneGeometry& scene) {
    if (!scene.has_centerline()) {
      throw std::runtime_error("TrackRef: scene has no track centerline");
    }
    const auto& cl = scene.track_centerline;
    const std::size_t n = cl.size();
    closed_ = scene.centerline_closed;
    pts_.reserve(n);
    half_width_.reserve(n);
    for (const CenterPoint& cp : cl) {
      pts_.push_back(cp.p);
      half_width_.push_back(cp.half_width);
    }
    cum_.resize(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = pts_[i];
      const Vec2& b = pts_[(i + 1) % n];
      cum_[i + 1] = cum_[i] + distance(a, b);
    }
    length_ = closed_ ? cum_[n] : cum_[n - 1];
    curvature_.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      curvature_[i] = menger_curvature(pts_[(i + n - 1) % n], pts_[i], pts_[(i + 1) % n]);
    }
  }

  double length() const { return length_; }
  std::size_t size() const { return pts_.size(); }

  struct Sample {
    Vec2 p;
    Vec2 tangent;
    double curvature = 0.0;
    double half_width = 0.0;
  };

  // Position/tangent/curvature at arclength s (wrapped for closed loops).
  Sample sample(double s) const {
    const std::size_t n = pts_.size();
    s = wrap_arclength(s);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    if (i >= n) i = n - 1;
    const std::size_t j = (i + 1) % n;
    const double seg_len = std::max(cum_[i + 1] - cum_[i], 1e-12);
    const double t = std::clamp((s - cum_[i]) / seg_len, 0.0, 1.0);
    Sample out;
    out.p = pts_[i] + (pts_[j] - pts_[i]) * t;
    out.tangent = normalized(pts_[j] - pts_[i]);
    out.curvature = curvature_[i] + (curvature_[j] - curvature_[i]) * t;
    out.half_width = half_width_[i] + (half_width_[j] - half_width_[i]) * t;
    return out;
  }

  // Arclength of the closest centerline point to p.
  double project(const Vec2& p) const {
    const std::size_t n_seg = closed_ ? pts_.size() : pts_.size() - 1;
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 0; i < n_seg; ++i) project_segment(p, i, best_d2, best_s);
    return best_s;
  }

  // Same, restricted to segments within +-window arclength of a prior
  // estimate. Followers move a fraction of a segment per step, so this is the
  // hot-path variant.
  double project_near(const Vec2& p, double s_hint, double window) const {
    const std::size_t n = pts_.size();
    const std::size_t n_seg = closed_ ? n : n - 1;
    s_hint = wrap_arclength(s_hint);
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = s_hint;
    bool any = false;
    for (std::size_t i = 0; i < n_seg; ++i) {
      const double mid = 0.5 * (cum_[i] + cum_[i + 1]);
      double gap = std::abs(mid - s_hint);
      if (closed_) gap = std::min(gap, length_ - gap);
      if (gap > window) continue;
      project_segment(p, i, best_d2, best_s);
      any = true;
    }
    return any ? best_s : project(p);
  }

  double wrap_arclength(double s) const {
    if (!closed_ || length_ <= 0.0) return std::clamp(s, 0.0, length_);
    s = std::fmod(s, length_);
    if (s < 0.0) s += length_;
    return s;
  }

 private:
  void project_segment(const Vec2& p, std::size_t i, double& best_d2, double& best_s) const {
    const Vec2& a = pts_[i];
    const Vec2& b = pts_[(i + 1) % pts_.size()];
    const Vec2 e = b - a;
    const double len2 = std::max(dot(e, e), 1e-12);
    const double t = std::clamp(dot(p - a, e) / len2, 0.0, 1.0);
    const Vec2 q = a + e * t;
    const double d2 = dot(p - q, p - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = cum_[i] + std::sqrt(len2) * t;
    }
  }

  static double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double area2 = cross(b - a, c - a);  // twice signed triangle area
    const double d = distance(a, b) * distance(b, c) * distance(c, a);
    return d > 1e-12 ? 2.0 * area2 / d : 0.0;
  }

  std::vector<Vec2> pts_;
  std::vector<double> half_width_;
  std::vector<double> cum_;
  std::vector<double> curvature_;
  double length_ = 0.0;
  bool closed_ = false;
};

struct ObstacleController {
  double lookahead = 1.2;           // m
  double target_speed_scale = 0.6;  // fraction of max_speed on straights
  double centerline_progress = 0.0; // last projected arclength, m
  double throttle_kp = 0.8;
};

// Pure pursuit toward the point `lookahead` meters ahead of the closest-point
// projection, with throttle tracking a curvature-limited speed profile.
// Positive steer turns left; a vehicle left of the line therefore steers < 0.
inline std::pair<double, double> obstacle_control(ObstacleController& ctrl,
                                                  const VehicleState& state,
                                                  const TrackRef& track,
                                                  const VehicleParams& params) {
  const double s = track.project_near(state.position(), ctrl.centerline_progress, 5.0);
  ctrl.centerline_progress = s;
  const TrackRef::Sample ahead = track.sample(s + ctrl.lookahead);

  const Vec2 to_target = ahead.p - state.position();
  const double alpha = wrap_angle(std::atan2(to_target.y, to_target.x) - state.yaw);
  const double steer = std::clamp(
      std::atan2(2.0 * params.wheelbase * std::sin(alpha), ctrl.lookahead),
      params.delta_min, params.delta_max);

  const TrackRef::Sample here = track.sample(s);
  const double corner_cap = std::sqrt(params.mu_g / std::max(std::abs(here.curvature), 1e-9));
  const double v_target = std::min(params.max_speed * ctrl.target_speed_scale, corner_cap);
  // feedforward holds the target against drag; proportional term closes the gap
  const double ff = (params.drag_coeff * v_target * v_target + params.rolling_resist) /
                    params.motor_gain;
  const double throttle = std::clamp(ctrl.throttle_kp * (v_target - state.v) + ff, 0.0, 1.0);
  return {throttle, steer};
}

struct SpawnConfig {
  int n_obstacles = 15;
  double speed_advantage = 1.5;        // ego max_speed multiplier over obstacle top speed
  double spawn_jitter_frac = 0.1;      // fraction of inter-car spacing
  double target_speed_scale = 0.6;
  double lookahead = 1.2;
  double throttle_kp = 0.8;
  Footprint footprint{};
};

struct SpawnResult {
  VehicleState ego;
  VehicleParams ego_params;
  std::vector<VehicleState> obstacles;
  std::vector<ObstacleController> controllers;
};

// Places obstacles at uniformly spaced centerline arclengths with seeded
// jitter, all heading in track direction, then puts the ego at the first
// spawn pose with enough clearance. Reversed mode flips the ego heading.
inline SpawnResult spawn_training_scene(HeadingMode mode, const SpawnConfig& cfg,
                                        const SceneGeometry& scene, const TrackRef& track,
                                        const VehicleParams& base_params,
                                        std::uint64_t rng_seed) {
  if (cfg.n_obstacles < 0) throw std::invalid_argument("spawn: n_obstacles < 0");
  if (scene.spawn_poses.empty()) throw std::runtime_error("spawn: scene has no spawn poses");

  Rng rng(mix_seed(rng_seed, 0x5eed5eed));
  SpawnResult out;

  const double obstacle_top_speed = base_params.max_speed * cfg.target_speed_scale;
  if (cfg.n_obstacles > 0) {
    const double spacing = track.length() / cfg.n_obstacles;
    if (spacing < 4.0 * cfg.footprint.half_length) {
      throw std::runtime_error("spawn: n_obstacles exceeds non-overlapping spawn slots");
    }
    for (int i = 0; i < cfg.n_obstacles; ++i) {
      const double jitter = rng.uniform(-cfg.spawn_jitter_frac, cfg.spawn_jitter_frac) * spacing;
      const auto s = track.sample(i * spacing + jitter);
      VehicleState v;
      v.x = s.p.x;
      v.y = s.p.y;
      v.yaw = std::atan2(s.tangent.y, s.tangent.x);
      v.v = 0.5 * std::min(obstacle_top_speed,
                           std::sqrt(base_params.mu_g / std::max(std::abs(s.curvature), 1e-9)));
      out.obstacles.push_back(v);
      ObstacleController ctrl;
      ctrl.lookahead = cfg.lookahead;
      ctrl.target_speed_scale = cfg.target_speed_scale;
      ctrl.throttle_kp = cfg.throttle_kp;
      ctrl.centerline_progress = track.wrap_arclength(i * spacing + jitter);
      out.controllers.push_back(ctrl);
    }
    for (std::size_t a = 0; a < out.obstacles.size(); ++a) {
      for (std::size_t b = a + 1; b < out.obstacles.size(); ++b) {
        if (detect_collision(out.obstacles[a], cfg.footprint, out.obstacles[b], cfg.footprint)) {
          throw std::runtime_error("spawn: obstacle footprints overlap at t=0");
        }
      }
    }
  }

  // Ego goes to the first pose clear of all obstacles (inflated footprint as margin).
  const Footprint margin{2.0 * cfg.footprint.half_length, 2.0 * cfg.footprint.half_width};
  const SpawnPose* chosen = nullptr;
  for (const SpawnPose& pose : scene.spawn_poses) {
    VehicleState candidate;
    candidate.x = pose.p.x;
    candidate.y = pose.p.y;
    candidate.yaw = pose.yaw;
    bool clear = true;
    for (const VehicleState& obs : out.obstacles) {
      if (detect_collision(candidate, margin, obs, cfg.footprint)) {
        clear = false;
        break;
      }
    }
    if (clear) {
      chosen = &pose;
      out.ego = candidate;
      break;
    }
  }
  if (chosen == nullptr) throw std::runtime_error("spawn: no free spawn pose for ego");
  if (mode == HeadingMode::Reversed) out.ego.yaw = wrap_angle(out.ego.yaw + std::numbers::pi);

  out.ego_params = base_params;
  out.ego_params.max_speed = cfg.speed_advantage * obstacle_top_speed;
  return out;
}

}  // namespace swerve
