#pragma once

// The training MDP: observation assembly, action scaling, reward, termination
// and episode stepping of the ego plus all scripted obstacle cars.
//
// Reward: 5*T^2 per step (momentum incentive; steady-state speed scales as
// sqrt(T), so this tracks v^4), replaced by a flat -2.0 on a full-lock
// steering reversal (opposite saturated commands on consecutive steps).
// Collisions and off-track exits terminate without an explicit penalty; the
// lost future reward is carried by a zero value bootstrap at the cut.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swerve/agents.hpp"
#include "swerve/dynamics.hpp"
#include "swerve/raycast.hpp"
#include "swerve/scene.hpp"

namespace swerve {

enum class Termination { Running, Collision, OffTrack, TimeLimit };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Running: return "running";
    case Termination::Collision: return "collision";
    case Termination::OffTrack: return "offtrack";
    case Termination::TimeLimit: return "timelimit";
  }
  return "?";
}

// Policy outputs before scaling, nominally in [-1, 1].
struct RawAction {
  double a_throttle = 0.0;
  double a_steer = 0.0;
};

// Throttle: clamp to [0, 1]. Steering: map [-1, 1] linearly onto
// [delta_min, delta_max], then clamp to those limits.
inline std::pair<double, double> scale_action(const RawAction& raw, const VehicleParams& p) {
  if (!std::isfinite(raw.a_throttle) || !std::isfinite(raw.a_steer)) {
    throw std::domain_error("scale_action: non-finite action");
  }
  const double throttle = std::clamp(raw.a_throttle, 0.0, 1.0);
  const double mid = 0.5 * (p.delta_max + p.delta_min);
  const double halfspan = 0.5 * (p.delta_max - p.delta_min);
  const double steer = std::clamp(mid + raw.a_steer * halfspan, p.delta_min, p.delta_max);
  return {throttle, steer};
}

inline constexpr double kReversalPenalty = -2.0;
inline constexpr double kMomentumRewardGain = 5.0;
inline constexpr double kReversalEps = 1e-6;

// a_steer_prev / a_steer_curr are the post-clamp normalized commands in
// [-1, 1]. The penalty branch replaces the momentum term.
inline double compute_reward(double throttle, double a_steer_prev, double a_steer_curr) {
  if (a_steer_prev * a_steer_curr <= -1.0 + kReversalEps) return kReversalPenalty;
  return kMomentumRewardGain * throttle * throttle;
}

struct Transition {
  DepthScan observation;  // scan after the step
  RawAction raw_action;
  double throttle = 0.0;
  double steer = 0.0;
  double reward = 0.0;
  Termination termination = Termination::Running;
  double prev_a_steer = 0.0;  // normalized command the reward compared against
};

struct EnvConfig {
  SpawnConfig spawn{};
  VehicleParams vehicle{};
  double max_range = 10.0;
  int episode_cap = 5000;
  bool offtrack_terminates = true;
};

class Env {
 public:
  Env(const SceneGeometry& scene, const EnvConfig& cfg)
      : scene_(&scene), cfg_(cfg), track_(scene) {}

  DepthScan reset(HeadingMode mode, std::uint64_t seed) {
    mode_ = mode;
    auto spawn = spawn_training_scene(mode, cfg_.spawn, *scene_, track_, cfg_.vehicle, seed);
    ego_ = spawn.ego;
    ego_params_ = spawn.ego_params;
    obstacles_ = std::move(spawn.obstacles);
    controllers_ = std::move(spawn.controllers);
    step_count_ = 0;
    prev_a_steer_ = 0.0;
    done_ = false;
    if (log_) log_episode_index_++;
    return observe();
  }

  Transition step(const RawAction& raw) {
    if (done_) throw std::logic_error("Env::step: episode already terminated");

    const auto [throttle, steer] = scale_action(raw, ego_params_);
    const double a_norm = std::clamp(raw.a_steer, -1.0, 1.0);
    const double prev = prev_a_steer_;
    const double reward = compute_reward(throttle, prev, a_norm);
    prev_a_steer_ = a_norm;

    ego_ = step_dynamics(ego_, throttle, steer, ego_params_);
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      const auto [to, so] = obstacle_control(controllers_[i], obstacles_[i], track_, cfg_.vehicle);
      obstacles_[i] = step_dynamics(obstacles_[i], to, so, cfg_.vehicle);
    }
    ++step_count_;

    Termination term = Termination::Running;
    for (const VehicleState& obs : obstacles_) {
      if (detect_collision(ego_, cfg_.spawn.footprint, obs, cfg_.spawn.footprint)) {
        term = Termination::Collision;
        break;
      }
    }
    if (term == Termination::Running && cfg_.offtrack_terminates && off_track(ego_, *scene_)) {
      term = Termination::OffTrack;
    }
    if (term == Termination::Running && step_count_ >= cfg_.episode_cap) {
      term = Termination::TimeLimit;
    }
    done_ = term != Termination::Running;

    Transition tr;
    tr.observation = observe();
    tr.raw_action = raw;
    tr.throttle = throttle;
    tr.steer = steer;
    tr.reward = reward;
    tr.termination = term;
    tr.prev_a_steer = prev;
    if (log_) log_step(tr);
    return tr;
  }

  DepthScan observe() const {
    std::vector<std::pair<VehicleState, Footprint>> others;
    others.reserve(obstacles_.size());
    for (const VehicleState& o : obstacles_) others.emplace_back(o, cfg_.spawn.footprint);
    return cast_rays(ego_, *scene_, others, cfg_.max_range);
  }

  // Direct state injection for fixtures and tests; the episode continues from
  // the given poses.
  void set_states(const VehicleState& ego, const std::vector<VehicleState>& obstacles) {
    if (obstacles.size() != obstacles_.size()) {
      throw std::invalid_argument("Env::set_states: obstacle count mismatch");
    }
    ego_ = ego;
    obstacles_ = obstacles;
  }

  // Trajectory log: one CSV row per agent per step.
  void start_logging(const std::string& path) {
    log_.emplace(path);
    if (!*log_) throw std::runtime_error("Env: cannot write trajectory log '" + path + "'");
    *log_ << "episode,step,agent_id,x,y,yaw,v,throttle,steer,reward,termination\n";
  }

  void stop_logging() { log_.reset(); }

  bool done() const { return done_; }
  int step_count() const { return step_count_; }
  const VehicleState& ego() const { return ego_; }
  const VehicleParams& ego_params() const { return ego_params_; }
  const std::vector<VehicleState>& obstacles() const { return obstacles_; }
  const SceneGeometry& scene() const { return *scene_; }
  const TrackRef& track() const { return track_; }
  HeadingMode mode() const { return mode_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  void log_step(const Transition& tr) {
    auto row = [&](int agent, const VehicleState& s, double t, double d, double r) {
      *log_ << log_episode_index_ << ',' << step_count_ << ',' << agent << ',' << s.x << ','
            << s.y << ',' << s.yaw << ',' << s.v << ',' << t << ',' << d << ',' << r << ','
            << to_string(tr.termination) << '\n';
    };
    row(0, ego_, tr.throttle, tr.steer, tr.reward);
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      row(static_cast<int>(i) + 1, obstacles_[i], 0.0, obstacles_[i].steer, 0.0);
    }
  }

  const SceneGeometry* scene_;
  EnvConfig cfg_;
  TrackRef track_;
  HeadingMode mode_ = HeadingMode::Default;
  VehicleState ego_{};
  VehicleParams ego_params_{};
  std::vector<VehicleState> obstacles_;
  std::vector<ObstacleController> controllers_;
  int step_count_ = 0;
  double prev_a_steer_ = 0.0;
  bool done_ = true;
  std::optional<std::ofstream> log_;
  long log_episode_index_ = -1;
};

}  // namespace swerve
