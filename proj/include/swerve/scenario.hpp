#pragma once

// Intersection scenario harness: the ego enters from the south while one
// obstacle car crosses Right-to-Left, Head-to-Head, or Left-to-Right at
// constant speed. A trial succeeds when the ego's center reaches the exit
// region, fails on contact, and a timeout counts as failure but is reported
// separately. The success rule is identical for every controller.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swerve/dynamics.hpp"
#include "swerve/env.hpp"
#include "swerve/geometry.hpp"
#include "swerve/mpc.hpp"
#include "swerve/policy.hpp"
#include "swerve/raycast.hpp"
#include "swerve/rng.hpp"
#include "swerve/scene.hpp"

namespace swerve {

enum class ScenarioDirection { RightToLeft, HeadToHead, LeftToRight };

inline const char* to_string(ScenarioDirection d) {
  switch (d) {
    case ScenarioDirection::RightToLeft: return "r2l";
    case ScenarioDirection::HeadToHead: return "h2h";
    case ScenarioDirection::LeftToRight: return "l2r";
  }
  return "?";
}

inline const char* direction_label(ScenarioDirection d) {
  switch (d) {
    case ScenarioDirection::RightToLeft: return "R to L";
    case ScenarioDirection::HeadToHead: return "H to H";
    case ScenarioDirection::LeftToRight: return "L to R";
  }
  return "?";
}

struct Scenario {
  ScenarioDirection direction = ScenarioDirection::HeadToHead;
  double obstacle_speed = 1.0;  // m/s; 0 permitted for no-conflict fixtures
  double ego_speed = 1.0;       // initial ego speed, m/s
  int trials = 10;
  double jitter_pos = 0.2;      // +- m along the obstacle approach axis
  double jitter_delay = 0.2;    // +- s converted to an approach offset
  double timeout_s = 15.0;
  double spawn_distance = 6.0;  // m from the crossing center
  double ego_vmax = 2.0;        // scenario cap on ego top speed
  Polygon success_region;       // defaults to the far end of the ego's road

  void validate() const {
    if (obstacle_speed < 0.0) throw std::invalid_argument("scenario: obstacle_speed < 0");
    if (trials < 1) throw std::invalid_argument("scenario: trials < 1");
  }
};

inline Polygon default_success_region(double road_half_width = 1.2, double y_min = 6.0,
                                      double y_max = 15.0) {
  return {{{-road_half_width, y_min},
           {road_half_width, y_min},
           {road_half_width, y_max},
           {-road_half_width, y_max}}};
}

enum class TrialOutcome { Success, Collision, Timeout };

struct TrajectoryPoint {
  int step = 0;
  VehicleState ego;
  VehicleState obstacle;
  double throttle = 0.0;
  double steer = 0.0;
};

struct TrialResult {
  TrialOutcome outcome = TrialOutcome::Timeout;
  int steps = 0;
  std::vector<TrajectoryPoint> trajectory;
};

struct ScenarioResult {
  std::vector<TrialResult> trials;
  int successes = 0;
  int collisions = 0;
  int timeouts = 0;

  int success_rate_percent() const {
    return trials.empty() ? 0
                          : static_cast<int>(std::lround(100.0 * successes /
                                                         static_cast<double>(trials.size())));
  }
};

// Controller interface for the harness; all controllers receive the same
// inputs and the harness applies the same success rule to each.
class EgoController {
 public:
  virtual ~EgoController() = default;
  virtual std::pair<double, double> act(const VehicleState& ego, const DepthScan& scan,
                                        const std::vector<SensedObstacle>& obstacles,
                                        const SceneGeometry& scene) = 0;
  virtual void reset() {}
  virtual std::string name() const = 0;
};

// Deterministic policy controller (actor mean, Eq-scaled).
class PolicyEgoController : public EgoController {
 public:
  PolicyEgoController(PolicyParams policy, VehicleParams params, std::string label = "drl")
      : policy_(std::move(policy)), params_(params), label_(std::move(label)) {}

  std::pair<double, double> act(const VehicleState&, const DepthScan& scan,
                                const std::vector<SensedObstacle>&, const SceneGeometry&) override {
    return scale_action(mean_action(policy_, scan), params_);
  }
  std::string name() const override { return label_; }

 private:
  PolicyParams policy_;
  VehicleParams params_;
  std::string label_;
};

class MpcEgoController : public EgoController {
 public:
  MpcEgoController(const VehicleParams& params, const ApfCost& cost, const MpcConfig& cfg)
      : mpc_(params, cost, cfg) {}

  std::pair<double, double> act(const VehicleState& ego, const DepthScan&,
                                const std::vector<SensedObstacle>& obstacles,
                                const SceneGeometry& scene) override {
    return mpc_.control(ego, obstacles, scene);
  }
  void reset() override {
    all_telemetry_.insert(all_telemetry_.end(), mpc_.telemetry().begin(), mpc_.telemetry().end());
    mpc_.reset();
  }
  std::string name() const override { return "mpc-apf"; }

  // telemetry across every trial run so far, including the active one
  std::vector<MpcTelemetryRow> collected_telemetry() const {
    std::vector<MpcTelemetryRow> rows = all_telemetry_;
    rows.insert(rows.end(), mpc_.telemetry().begin(), mpc_.telemetry().end());
    return rows;
  }

 private:
  MpcController mpc_;
  std::vector<MpcTelemetryRow> all_telemetry_;
};

// Fixed full-throttle straight driver; the engineered-collision fixture.
class StraightEgoController : public EgoController {
 public:
  std::pair<double, double> act(const VehicleState&, const DepthScan&,
                                const std::vector<SensedObstacle>&, const SceneGeometry&) override {
    return {1.0, 0.0};
  }
  std::string name() const override { return "straight"; }
};

struct ScenarioSetup {
  VehicleState ego;
  VehicleState obstacle;
};

// Obstacle approach pose for a direction, offset `approach_offset` meters
// back along its own travel direction.
inline ScenarioSetup scenario_setup(const Scenario& sc, double approach_offset) {
  ScenarioSetup setup;
  setup.ego.x = 0.0;
  setup.ego.y = -sc.spawn_distance;
  setup.ego.yaw = std::numbers::pi / 2.0;
  setup.ego.v = sc.ego_speed;

  const double d = sc.spawn_distance + approach_offset;
  switch (sc.direction) {
    case ScenarioDirection::RightToLeft:  // from the ego's right: east, heading west
      setup.obstacle = {d, 0.0, std::numbers::pi, sc.obstacle_speed, 0.0};
      break;
    case ScenarioDirection::HeadToHead:  // from the north, heading south
      setup.obstacle = {0.0, d, -std::numbers::pi / 2.0, sc.obstacle_speed, 0.0};
      break;
    case ScenarioDirection::LeftToRight:  // from the west, heading east
      setup.obstacle = {-d, 0.0, 0.0, sc.obstacle_speed, 0.0};
      break;
  }
  return setup;
}

struct RunScenarioOptions {
  VehicleParams vehicle{};
  Footprint footprint{};
  double max_range = 10.0;
};

inline ScenarioResult run_scenario(EgoController& controller, const Scenario& scenario,
                                   const SceneGeometry& scene, std::uint64_t seed,
                                   const RunScenarioOptions& opts = {}) {
  scenario.validate();
  const Polygon success =
      scenario.success_region.pts.empty() ? default_success_region() : scenario.success_region;

  VehicleParams ego_params = opts.vehicle;
  ego_params.max_speed = scenario.ego_vmax;

  ScenarioResult result;
  for (int trial = 0; trial < scenario.trials; ++trial) {
    Rng rng(mix_seed(seed, 0x7814A, static_cast<std::uint64_t>(trial)));
    const double offset = rng.uniform(-scenario.jitter_pos, scenario.jitter_pos) +
                          scenario.obstacle_speed * rng.uniform(-scenario.jitter_delay,
                                                                scenario.jitter_delay);
    ScenarioSetup setup = scenario_setup(scenario, offset);
    controller.reset();

    TrialResult tr;
    const int max_steps = static_cast<int>(std::lround(scenario.timeout_s / ego_params.dt));
    for (int step = 0; step < max_steps; ++step) {
      const DepthScan scan =
          cast_rays(setup.ego, scene, {{setup.obstacle, opts.footprint}}, opts.max_range);
      const std::vector<SensedObstacle> sensed = {{setup.obstacle}};
      const auto [throttle, steer] = controller.act(setup.ego, scan, sensed, scene);

      setup.ego = step_dynamics(setup.ego, throttle, steer, ego_params);
      // constant-velocity crossing obstacle, integrated kinematically
      setup.obstacle.x += ego_params.dt * setup.obstacle.v * std::cos(setup.obstacle.yaw);
      setup.obstacle.y += ego_params.dt * setup.obstacle.v * std::sin(setup.obstacle.yaw);

      tr.trajectory.push_back({step, setup.ego, setup.obstacle, throttle, steer});
      tr.steps = step + 1;

      if (detect_collision(setup.ego, opts.footprint, setup.obstacle, opts.footprint)) {
        tr.outcome = TrialOutcome::Collision;
        break;
      }
      if (point_in_convex_polygon(setup.ego.position(), success)) {
        tr.outcome = TrialOutcome::Success;
        break;
      }
      tr.outcome = TrialOutcome::Timeout;
    }
    switch (tr.outcome) {
      case TrialOutcome::Success: result.successes += 1; break;
      case TrialOutcome::Collision: result.collisions += 1; break;
      case TrialOutcome::Timeout: result.timeouts += 1; break;
    }
    result.trials.push_back(std::move(tr));
  }
  return result;
}

// Published hardware reference rates, rendered as annotation rows.
struct ReferenceRow {
  const char* method;
  int r2l, h2h, l2r;
};
inline constexpr ReferenceRow kReferenceRows[] = {
    {"MPC-APF (published hardware)", 70, 10, 60},
    {"DRL Default (published hardware)", 80, 30, 70},
    {"DRL Reversed (published hardware)", 80, 60, 70},
};

using ResultTableInput =
    std::map<std::string, std::map<ScenarioDirection, ScenarioResult>>;

struct ResultTable {
  std::string text;
  std::string csv;
};

// Success-rate table: methods x {R to L, H to H, L to R}, with the published
// hardware rows appended as clearly-marked annotations. Missing cells render
// as "-", never as 0.
inline ResultTable tabulate(const ResultTableInput& results) {
  if (results.empty()) throw std::invalid_argument("tabulate: no results");
  const ScenarioDirection dirs[] = {ScenarioDirection::RightToLeft, ScenarioDirection::HeadToHead,
                                    ScenarioDirection::LeftToRight};
  std::ostringstream text, csv;
  csv << "method,R to L,H to H,L to R,annotation\n";
  text << "Collision Avoidance Success Rate (%)\n";
  char line[128];
  std::snprintf(line, sizeof(line), "%-34s %8s %8s %8s\n", "Method", "R to L", "H to H", "L to R");
  text << line;
  for (const auto& [method, per_dir] : results) {
    std::string cells[3];
    for (int i = 0; i < 3; ++i) {
      const auto it = per_dir.find(dirs[i]);
      cells[i] = it == per_dir.end() ? std::string("-")
                                     : std::to_string(it->second.success_rate_percent());
    }
    std::snprintf(line, sizeof(line), "%-34s %8s %8s %8s\n", method.c_str(), cells[0].c_str(),
                  cells[1].c_str(), cells[2].c_str());
    text << line;
    csv << method << ',' << cells[0] << ',' << cells[1] << ',' << cells[2] << ",measured\n";
  }
  for (const ReferenceRow& ref : kReferenceRows) {
    std::snprintf(line, sizeof(line), "%-34s %8d %8d %8d\n", ref.method, ref.r2l, ref.h2h,
                  ref.l2r);
    text << line;
    csv << ref.method << ',' << ref.r2l << ',' << ref.h2h << ',' << ref.l2r
        << ",published hardware result\n";
  }
  return {text.str(), csv.str()};
}

}  // namespace swerve
