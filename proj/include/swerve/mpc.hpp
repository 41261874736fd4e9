#pragma once

// Receding-horizon baseline: linear bicycle prediction (first-order Taylor
// expansion about the current state at zero controls), an artificial
// potential-field cost with line-charge obstacle repulsion, and projected
// gradient descent with Armijo backtracking over the horizon-10 control
// sequence.
//
// Prediction model (explicit Euler, state s = [x, y, yaw, v], controls
// u = [T, delta]):
//   x'   = x + dt v cos(yaw)
//   y'   = y + dt v sin(yaw)
//   yaw' = yaw + dt (v / L) tan(delta)
//   v'   = v + dt (c_m T - c_d v^2 - c_r sign(v)) / m
//
// Jacobians at (s0, u = 0):
//   A = I +  dt * [ 0 0 -v sin(yaw)  cos(yaw)
//                   0 0  v cos(yaw)  sin(yaw)
//                   0 0  0           0          (tan(0) = 0)
//                   0 0  0          -2 c_d v / m ]   (rows x,y,yaw,v)
//   B =      dt * [ 0        0
//                   0        0
//                   0        v / L                   (sec^2(0) = 1)
//                   c_m / m  0 ]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swerve/dynamics.hpp"
#include "swerve/geometry.hpp"
#include "swerve/scene.hpp"

namespace swerve {

inline constexpr int kMpcHorizon = 10;

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Mat42 = std::array<std::array<double, 2>, 4>;
using ControlSeq = std::array<std::array<double, 2>, kMpcHorizon>;  // (throttle, steer)

struct ApfCost {
  double q_obs = 6.0;    // line-charge strength, obstacle repulsion
  double q_bound = 0.3;  // boundary repulsion
  double eps_d = 0.05;   // softening distance, m
  double w_ctrl = 0.01;  // control-effort weight
  double w_prog = 2.0;   // progress reward weight
};

struct MpcConfig {
  double dt = 0.05;        // prediction timestep, decoupled from the sim dt
  int max_iters = 20;
  double rel_tol = 1e-4;   // relative cost-decrease stopping threshold
  double alpha0 = 0.5;     // initial line-search step
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  double steer_probe = 0.15;  // rad, symmetry-breaking bias probe
};

struct Linearization {
  Mat4 A{};
  Mat42 B{};
  Vec4 f0{};  // f(s0, 0)
  Vec4 s0{};
};

inline Vec4 state_to_vec(const VehicleState& s) { return {s.x, s.y, s.yaw, s.v}; }

// Nonlinear prediction step (used for f0 and by the finite-difference tests).
inline Vec4 predict_step(const Vec4& s, double throttle, double steer,
                         const VehicleParams& p, double dt) {
  const double sign_v = s[3] > 0.0 ? 1.0 : (s[3] < 0.0 ? -1.0 : 0.0);
  Vec4 out;
  out[0] = s[0] + dt * s[3] * std::cos(s[2]);
  out[1] = s[1] + dt * s[3] * std::sin(s[2]);
  out[2] = s[2] + dt * (s[3] / p.wheelbase) * std::tan(steer);
  out[3] = s[3] + dt * (p.motor_gain * throttle - p.drag_coeff * s[3] * s[3] -
                        p.rolling_resist * sign_v) /
                      p.mass;
  return out;
}

inline Linearization linearize_bicycle(const VehicleState& state, const VehicleParams& p,
                                       double dt_mpc) {
  if (!state_is_finite(state)) throw std::domain_error("linearize_bicycle: non-finite state");
  Linearization lin;
  lin.s0 = state_to_vec(state);
  lin.f0 = predict_step(lin.s0, 0.0, 0.0, p, dt_mpc);

  const double v = state.v;
  const double cy = std::cos(state.yaw), sy = std::sin(state.yaw);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) lin.A[i][j] = i == j ? 1.0 : 0.0;
  lin.A[0][2] = -dt_mpc * v * sy;
  lin.A[0][3] = dt_mpc * cy;
  lin.A[1][2] = dt_mpc * v * cy;
  lin.A[1][3] = dt_mpc * sy;
  lin.A[3][3] = 1.0 - 2.0 * dt_mpc * p.drag_coeff * v / p.mass;

  for (auto& row : lin.B) row = {0.0, 0.0};
  lin.B[2][1] = dt_mpc * v / p.wheelbase;
  lin.B[3][0] = dt_mpc * p.motor_gain / p.mass;
  return lin;
}

// Linear rollout: s_{k+1} = f0 + A (s_k - s0) + B u_k.
inline std::array<Vec4, kMpcHorizon + 1> predict_linear(const Linearization& lin,
                                                        const ControlSeq& u) {
  std::array<Vec4, kMpcHorizon + 1> s;
  s[0] = lin.s0;
  for (int k = 0; k < kMpcHorizon; ++k) {
    for (int i = 0; i < 4; ++i) {
      double acc = lin.f0[i];
      for (int j = 0; j < 4; ++j) acc += lin.A[i][j] * (s[k][j] - lin.s0[j]);
      acc += lin.B[i][0] * u[k][0] + lin.B[i][1] * u[k][1];
      s[k + 1][i] = acc;
    }
  }
  return s;
}

// Constant-velocity obstacle prediction: a charged line segment from the
// obstacle's current position to its position at the end of the horizon.
struct ObstaclePrediction {
  Segment path;
};

inline ObstaclePrediction predict_obstacle(const VehicleState& s, double horizon_time) {
  const Vec2 vel = {s.v * std::cos(s.yaw), s.v * std::sin(s.yaw)};
  return {Segment{s.position(), s.position() + vel * horizon_time}};
}

// Potential-field cost over a predicted trajectory:
//   sum_t [ sum_obs q_obs / (d + eps) + sum_bound q_bound / (d + eps) ]
//   + sum_k [ w_ctrl |u_k|^2 - w_prog * progress_k ]
// Field terms run over the controllable states t = 1..N; progress is each
// step's displacement projected on the initial heading.
inline double apf_cost(const std::array<Vec4, kMpcHorizon + 1>& traj,
                       const std::vector<ObstaclePrediction>& obstacles,
                       const std::vector<Segment>& boundaries, const ApfCost& cost,
                       const Vec2& heading0, const ControlSeq& u) {
  double total = 0.0;
  for (int t = 1; t <= kMpcHorizon; ++t) {
    const Vec2 p{traj[t][0], traj[t][1]};
    for (const ObstaclePrediction& obs : obstacles) {
      total += cost.q_obs / (point_segment_distance(p, obs.path) + cost.eps_d);
    }
    for (const Segment& seg : boundaries) {
      total += cost.q_bound / (point_segment_distance(p, seg) + cost.eps_d);
    }
  }
  for (int k = 0; k < kMpcHorizon; ++k) {
    total += cost.w_ctrl * (u[k][0] * u[k][0] + u[k][1] * u[k][1]);
    const Vec2 dp{traj[k + 1][0] - traj[k][0], traj[k + 1][1] - traj[k][1]};
    total -= cost.w_prog * dot(dp, heading0);
  }
  return total;
}

namespace detail {

// d/dp of q / (d(p, seg) + eps); zero at d = 0 where the distance is not
// differentiable (the softened field is flat there anyway).
inline Vec2 field_term_grad(const Vec2& p, const Segment& seg, double q, double eps_d) {
  const Vec2 closest = closest_point_on_segment(p, seg);
  const double d = distance(p, closest);
  if (d < 1e-12) return {0.0, 0.0};
  const double coef = -q / ((d + eps_d) * (d + eps_d)) / d;
  return {(p.x - closest.x) * coef, (p.y - closest.y) * coef};
}

}  // namespace detail

// Exact gradient of apf_cost over the linear rollout, by adjoint recursion:
//   lambda_N = dstage/ds_N,  lambda_k = dstage/ds_k + A^T lambda_{k+1},
//   dJ/du_k = B^T lambda_{k+1} + 2 w_ctrl u_k.
inline ControlSeq apf_cost_grad(const Linearization& lin,
                                const std::array<Vec4, kMpcHorizon + 1>& traj,
                                const std::vector<ObstaclePrediction>& obstacles,
                                const std::vector<Segment>& boundaries, const ApfCost& cost,
                                const Vec2& heading0, const ControlSeq& u) {
  std::array<Vec4, kMpcHorizon + 1> stage_grad{};  // d(stage terms)/d s_t, xy components
  for (int t = 1; t <= kMpcHorizon; ++t) {
    const Vec2 p{traj[t][0], traj[t][1]};
    Vec2 g{0.0, 0.0};
    for (const ObstaclePrediction& obs : obstacles) {
      const Vec2 fg = detail::field_term_grad(p, obs.path, cost.q_obs, cost.eps_d);
      g.x += fg.x;
      g.y += fg.y;
    }
    for (const Segment& seg : boundaries) {
      const Vec2 fg = detail::field_term_grad(p, seg, cost.q_bound, cost.eps_d);
      g.x += fg.x;
      g.y += fg.y;
    }
    // progress terms: -w_prog (p_t - p_{t-1}) . h0 gives -w_prog h0 at p_t,
    // and -w_prog (p_{t+1} - p_t) . h0 gives +w_prog h0 at p_t (t < N)
    g.x += -cost.w_prog * heading0.x;
    g.y += -cost.w_prog * heading0.y;
    if (t < kMpcHorizon) {
      g.x += cost.w_prog * heading0.x;
      g.y += cost.w_prog * heading0.y;
    }
    stage_grad[t][0] = g.x;
    stage_grad[t][1] = g.y;
  }

  ControlSeq grad{};
  Vec4 lambda = stage_grad[kMpcHorizon];
  for (int k = kMpcHorizon - 1; k >= 0; --k) {
    grad[k][0] = 2.0 * cost.w_ctrl * u[k][0];
    grad[k][1] = 2.0 * cost.w_ctrl * u[k][1];
    for (int i = 0; i < 4; ++i) {
      grad[k][0] += lin.B[i][0] * lambda[i];
      grad[k][1] += lin.B[i][1] * lambda[i];
    }
    if (k > 0) {
      Vec4 next{};
      for (int j = 0; j < 4; ++j) {
        double acc = stage_grad[k][j];
        for (int i = 0; i < 4; ++i) acc += lin.A[i][j] * lambda[i];
        next[j] = acc;
      }
      lambda = next;
    }
  }
  return grad;
}

struct SolveResult {
  ControlSeq controls{};
  int iterations = 0;
  std::vector<double> cost_trace;  // accepted iterates, non-increasing
  int cost_evals = 0;
  int grad_evals = 0;
  bool fallback = false;  // non-finite cost; caller should brake straight
};

// Projected gradient descent with Armijo backtracking on the N x 2 control
// sequence. Stops at max_iters or when the relative cost decrease of an
// accepted iterate falls below rel_tol. `progress_dir` is the unit direction
// the progress term rewards; callers that track a route keep it fixed across
// solves rather than re-deriving it from the drifting vehicle yaw.
inline SolveResult solve_mpc(const VehicleState& state,
                             const std::vector<ObstaclePrediction>& obstacles,
                             const std::vector<Segment>& boundaries, const ControlSeq& warm_start,
                             const ApfCost& cost, const VehicleParams& params,
                             const MpcConfig& mpc, const Vec2& progress_dir) {
  const Linearization lin = linearize_bicycle(state, params, mpc.dt);
  const Vec2 heading0 = progress_dir;

  auto project = [&](ControlSeq& u) {
    for (auto& uk : u) {
      uk[0] = std::clamp(uk[0], 0.0, 1.0);
      uk[1] = std::clamp(uk[1], params.delta_min, params.delta_max);
    }
  };

  SolveResult res;
  auto eval = [&](const ControlSeq& u) {
    res.cost_evals += 1;
    return apf_cost(predict_linear(lin, u), obstacles, boundaries, cost, heading0, u);
  };

  ControlSeq u = warm_start;
  project(u);
  double J = eval(u);
  if (!std::isfinite(J)) {
    res.fallback = true;
    res.controls = ControlSeq{};
    return res;
  }

  // A head-on obstacle sits on a symmetric saddle where the steering gradient
  // vanishes; probe a small bias either side and descend into whichever
  // half-space is cheaper. Exact ties go to the side with the larger
  // boundary clearance (left if there are no boundaries).
  {
    auto biased = [&](double sign) {
      ControlSeq b = u;
      for (auto& uk : b) uk[1] += sign * mpc.steer_probe;
      project(b);
      return b;
    };
    const ControlSeq left = biased(+1.0), right = biased(-1.0);
    const double Jl = eval(left), Jr = eval(right);
    if (std::isfinite(Jl) && std::isfinite(Jr) && std::min(Jl, Jr) < J) {
      const double tie = 1e-9 * std::max(1.0, std::abs(Jl) + std::abs(Jr));
      if (std::abs(Jl - Jr) <= tie) {
        auto clearance = [&](const ControlSeq& cand) {
          double worst = std::numeric_limits<double>::infinity();
          const auto traj = predict_linear(lin, cand);
          for (int t = 1; t <= kMpcHorizon; ++t) {
            const Vec2 p{traj[t][0], traj[t][1]};
            for (const Segment& s : boundaries) {
              worst = std::min(worst, point_segment_distance(p, s));
            }
          }
          return worst;
        };
        const bool go_left = boundaries.empty() || clearance(left) >= clearance(right);
        u = go_left ? left : right;
        J = go_left ? Jl : Jr;
      } else if (Jl < Jr) {
        u = left;
        J = Jl;
      } else {
        u = right;
        J = Jr;
      }
    }
  }
  res.cost_trace.push_back(J);

  for (int iter = 0; iter < mpc.max_iters; ++iter) {
    res.grad_evals += 1;
    const ControlSeq g = apf_cost_grad(lin, predict_linear(lin, u), obstacles, boundaries, cost,
                                       heading0, u);

    double alpha = mpc.alpha0;
    bool accepted = false;
    ControlSeq candidate{};
    double J_new = J;
    for (int bt = 0; bt < mpc.max_backtracks; ++bt) {
      candidate = u;
      for (int k = 0; k < kMpcHorizon; ++k) {
        candidate[k][0] -= alpha * g[k][0];
        candidate[k][1] -= alpha * g[k][1];
      }
      project(candidate);
      double decrease_ref = 0.0;  // <g, u - candidate>, nonnegative for a projection step
      for (int k = 0; k < kMpcHorizon; ++k) {
        decrease_ref += g[k][0] * (u[k][0] - candidate[k][0]);
        decrease_ref += g[k][1] * (u[k][1] - candidate[k][1]);
      }
      J_new = eval(candidate);
      if (!std::isfinite(J_new)) {
        res.fallback = true;
        res.controls = ControlSeq{};
        return res;
      }
      if (J_new <= J - mpc.armijo_c * decrease_ref && J_new <= J) {
        accepted = true;
        break;
      }
      alpha *= mpc.backtrack;
    }
    if (!accepted) break;  // stalled at a projected stationary point

    res.iterations += 1;
    res.cost_trace.push_back(J_new);
    const double rel = (J - J_new) / std::max(std::abs(J), 1e-12);
    u = candidate;
    J = J_new;
    if (rel < mpc.rel_tol) break;
  }

  res.controls = u;
  return res;
}

// Convenience overload: progress along the vehicle's current heading.
inline SolveResult solve_mpc(const VehicleState& state,
                             const std::vector<ObstaclePrediction>& obstacles,
                             const std::vector<Segment>& boundaries, const ControlSeq& warm_start,
                             const ApfCost& cost, const VehicleParams& params,
                             const MpcConfig& mpc) {
  return solve_mpc(state, obstacles, boundaries, warm_start, cost, params, mpc,
                   {std::cos(state.yaw), std::sin(state.yaw)});
}

// Analytic FLOP inventory of the solver, mirroring the operation counts of
// predict_linear / apf_cost / apf_cost_grad. Multiplies and adds count 1 each,
// divisions and square roots count 1, matching the network's convention.
struct MpcFlopModel {
  int n_obstacles = 0;
  int n_boundaries = 0;

  // point-segment distance: ~6 sub/mul for projection setup, clamp-free path
  // dominated by dot products and one sqrt; counted as 20.
  static constexpr std::int64_t kPointSegDist = 20;

  std::int64_t per_rollout() const {
    // per step: 4 rows x (4 MAC + 2 MAC + adds) = 4*(8+4+3) = 60
    return kMpcHorizon * 60;
  }
  std::int64_t per_cost_eval() const {
    const std::int64_t field = static_cast<std::int64_t>(kMpcHorizon) *
                               (n_obstacles + n_boundaries) * (kPointSegDist + 2);
    const std::int64_t ctrl_prog = kMpcHorizon * (5 + 6);
    return per_rollout() + field + ctrl_prog;
  }
  std::int64_t per_grad_eval() const {
    const std::int64_t field_grad = static_cast<std::int64_t>(kMpcHorizon) *
                                    (n_obstacles + n_boundaries) * (kPointSegDist + 10);
    const std::int64_t adjoint = kMpcHorizon * (32 + 16 + 8);  // A^T lambda, B^T lambda, misc
    return per_rollout() + field_grad + adjoint;
  }
  std::int64_t solve_flops(const SolveResult& r) const {
    return r.cost_evals * per_cost_eval() + r.grad_evals * per_grad_eval();
  }
};

struct MpcTelemetryRow {
  int step = 0;
  int iterations = 0;
  double cost_initial = 0.0;
  double cost_final = 0.0;
  std::int64_t wall_ns = 0;
};

// Sensed obstacle for the baseline: ground-truth state (the DRL policy only
// ever sees the depth scan; this asymmetry is inherent to the method classes).
struct SensedObstacle {
  VehicleState state;
};

class MpcController {
 public:
  MpcController(const VehicleParams& params, const ApfCost& cost, const MpcConfig& cfg)
      : params_(params), cost_(cost), cfg_(cfg) {
    for (auto& u : warm_) u = {0.0, 0.0};
  }

  // Returns the first control of the optimized sequence, Eq-bounds clamped.
  std::pair<double, double> control(const VehicleState& state,
                                    const std::vector<SensedObstacle>& obstacles,
                                    const SceneGeometry& scene) {
    std::vector<ObstaclePrediction> preds;
    preds.reserve(obstacles.size());
    const double horizon_time = cfg_.dt * kMpcHorizon;
    for (const SensedObstacle& o : obstacles) preds.push_back(predict_obstacle(o.state, horizon_time));

    // Only boundaries within reach of the horizon matter for the field.
    const double reach = state.v * horizon_time + params_.max_speed * horizon_time + 5.0;
    std::vector<Segment> near;
    for (const Segment& s : scene.boundary_segments) {
      if (point_segment_distance(state.position(), s) <= reach) near.push_back(s);
    }

    // The progress direction is latched on the first call after reset, so the
    // controller holds its route through open junctions instead of chasing
    // whatever heading perturbations produced.
    if (!has_progress_dir_) {
      progress_dir_ = {std::cos(state.yaw), std::sin(state.yaw)};
      has_progress_dir_ = true;
    }

    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res = solve_mpc(state, preds, near, warm_, cost_, params_, cfg_, progress_dir_);
    const auto t1 = std::chrono::steady_clock::now();

    flop_model_.n_obstacles = static_cast<int>(preds.size());
    flop_model_.n_boundaries = static_cast<int>(near.size());
    last_flops_ = flop_model_.solve_flops(res);
    last_result_ = res;

    MpcTelemetryRow row;
    row.step = static_cast<int>(telemetry_.size());
    row.iterations = res.iterations;
    row.cost_initial = res.cost_trace.empty() ? 0.0 : res.cost_trace.front();
    row.cost_final = res.cost_trace.empty() ? 0.0 : res.cost_trace.back();
    row.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    telemetry_.push_back(row);

    if (res.fallback) {
      warm_ = ControlSeq{};
      return {0.0, 0.0};  // full brake, straight
    }

    // Warm start for the next call: shift by one step, repeat the tail.
    for (int k = 0; k + 1 < kMpcHorizon; ++k) warm_[k] = res.controls[k + 1];
    warm_[kMpcHorizon - 1] = res.controls[kMpcHorizon - 1];

    const double throttle = std::clamp(res.controls[0][0], 0.0, 1.0);
    const double steer = std::clamp(res.controls[0][1], params_.delta_min, params_.delta_max);
    return {throttle, steer};
  }

  void reset() {
    for (auto& u : warm_) u = {0.0, 0.0};
    telemetry_.clear();
    has_progress_dir_ = false;
  }

  const std::vector<MpcTelemetryRow>& telemetry() const { return telemetry_; }
  const SolveResult& last_result() const { return last_result_; }
  std::int64_t last_flops() const { return last_flops_; }
  const MpcFlopModel& flop_model() const { return flop_model_; }

 private:
  VehicleParams params_;
  ApfCost cost_;
  MpcConfig cfg_;
  ControlSeq warm_{};
  Vec2 progress_dir_{1.0, 0.0};
  bool has_progress_dir_ = false;
  std::vector<MpcTelemetryRow> telemetry_;
  SolveResult last_result_{};
  MpcFlopModel flop_model_{};
  std::int64_t last_flops_ = 0;
};

}  // namespace swerve
