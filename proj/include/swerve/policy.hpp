#pragma once

// Actor-critic parameter set: a 170-64-64-2 tanh actor whose output is the
// mean of a diagonal Gaussian with state-independent log-std, and a separate
// 170-64-64-1 critic.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "swerve/env.hpp"
#include "swerve/mlp.hpp"
#include "swerve/raycast.hpp"
#include "swerve/rng.hpp"

namespace swerve {

inline constexpr int kActionDim = 2;

struct PolicyParams {
  MlpParams actor;
  MlpParams critic;
  std::array<double, kActionDim> log_std{0.0, 0.0};
};

inline PolicyParams make_policy(Rng& rng, int obs_dim = kScanRays, int hidden = 64) {
  PolicyParams p;
  p.actor = make_mlp({obs_dim, hidden, hidden, kActionDim}, rng);
  p.critic = make_mlp({obs_dim, hidden, hidden, 1}, rng);
  p.log_std = {0.0, 0.0};
  return p;
}

inline std::array<double, kActionDim> actor_mean(const PolicyParams& p, const DepthScan& obs) {
  std::vector<double> out;
  forward(p.actor, obs.ranges.data(), obs.ranges.size(), out);
  return {out[0], out[1]};
}

inline double critic_value(const PolicyParams& p, const DepthScan& obs) {
  std::vector<double> out;
  forward(p.critic, obs.ranges.data(), obs.ranges.size(), out);
  return out[0];
}

// Diagonal-Gaussian log density of `action` around `mean`.
inline double gaussian_log_prob(const PolicyParams& p, const std::array<double, kActionDim>& mean,
                                const std::array<double, kActionDim>& action) {
  double lp = 0.0;
  for (int d = 0; d < kActionDim; ++d) {
    const double sigma = std::exp(p.log_std[d]);
    const double z = (action[d] - mean[d]) / sigma;
    lp += -0.5 * z * z - p.log_std[d] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

// Entropy of the diagonal Gaussian (state-independent).
inline double gaussian_entropy(const PolicyParams& p) {
  double h = 0.0;
  for (int d = 0; d < kActionDim; ++d) {
    h += p.log_std[d] + 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
  }
  return h;
}

struct SampledAction {
  RawAction raw;
  double log_prob = 0.0;
  double value = 0.0;  // critic estimate at the same observation
};

// Samples action ~ Normal(actor_mean, exp(log_std)) per dimension; log_prob is
// the density at the raw (pre-clamp) sample.
inline SampledAction sample_action(const PolicyParams& p, const DepthScan& obs, Rng& rng) {
  const auto mean = actor_mean(p, obs);
  std::array<double, kActionDim> action;
  for (int d = 0; d < kActionDim; ++d) {
    action[d] = mean[d] + std::exp(p.log_std[d]) * rng.normal();
  }
  SampledAction out;
  out.raw = {action[0], action[1]};
  out.log_prob = gaussian_log_prob(p, mean, action);
  out.value = critic_value(p, obs);
  return out;
}

// Deterministic control for evaluation and latency benchmarks: the actor mean,
// no sampling.
inline RawAction mean_action(const PolicyParams& p, const DepthScan& obs) {
  const auto mean = actor_mean(p, obs);
  return {mean[0], mean[1]};
}

}  // namespace swerve
