#pragma once

// Planar single-track vehicle model. Longitudinal force balance
// (motor - aero drag - rolling resistance), kinematic bicycle heading with a
// friction-circle cap on lateral acceleration, semi-implicit Euler at a fixed
// timestep. All functions are pure over value types.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "swerve/geometry.hpp"

namespace swerve {

struct VehicleParams {
  double wheelbase = 0.32;       // m
  double mass = 3.5;             // kg
  double max_speed = 5.0;        // m/s
  double delta_min = -0.36;      // rad
  double delta_max = 0.36;       // rad
  double motor_gain = 20.0;      // N per unit throttle
  double drag_coeff = 0.9;       // N s^2 / m^2
  double rolling_resist = 1.0;   // N
  double mu_g = 8.0;             // max lateral acceleration, m/s^2
  double dt = 0.02;              // s
};

struct VehicleState {
  double x = 0.0;     // m
  double y = 0.0;     // m
  double yaw = 0.0;   // rad, wrapped to (-pi, pi]
  double v = 0.0;     // m/s, signed longitudinal speed (never negative here)
  double steer = 0.0; // rad, last applied effective steering

  Vec2 position() const { return {x, y}; }
};

// Wrap to (-pi, pi].
inline double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta + std::numbers::pi, two_pi);
  if (r <= 0.0) r += two_pi;
  return r - std::numbers::pi;
}

inline bool state_is_finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.yaw) &&
         std::isfinite(s.v) && std::isfinite(s.steer);
}

// Longitudinal force for forward motion. At rest, rolling resistance acts as
// stiction: small throttle does not creep the car.
inline double longitudinal_force(double v, double throttle, const VehicleParams& p) {
  const double drive = p.motor_gain * throttle;
  if (v <= 0.0) return std::max(drive - p.rolling_resist, 0.0);
  return drive - p.drag_coeff * v * v - p.rolling_resist;
}

inline VehicleState step_dynamics(const VehicleState& state, double throttle,
                                  double steer_cmd, const VehicleParams& p) {
  if (!state_is_finite(state) || !std::isfinite(throttle) || !std::isfinite(steer_cmd)) {
    throw std::domain_error("step_dynamics: non-finite input");
  }
  throttle = std::clamp(throttle, 0.0, 1.0);
  steer_cmd = std::clamp(steer_cmd, p.delta_min, p.delta_max);

  VehicleState next = state;
  const double accel = longitudinal_force(state.v, throttle, p) / p.mass;
  next.v = std::clamp(state.v + p.dt * accel, 0.0, p.max_speed);

  // Friction circle: |v^2 tan(steer)/L| <= mu_g. Applied to the updated speed.
  double steer_eff = steer_cmd;
  if (next.v > 1e-9) {
    const double tan_cap = p.mu_g * p.wheelbase / (next.v * next.v);
    const double steer_cap = std::atan(tan_cap);
    steer_eff = std::clamp(steer_cmd, -steer_cap, steer_cap);
  }
  next.steer = steer_eff;

  next.yaw = wrap_angle(state.yaw + p.dt * (next.v / p.wheelbase) * std::tan(steer_eff));
  next.x = state.x + p.dt * next.v * std::cos(next.yaw);
  next.y = state.y + p.dt * next.v * std::sin(next.yaw);
  return next;
}

}  // namespace swerve
