#pragma once

// Adam with bias correction over the policy's flat parameter tensors.
// Parameters and moments are float32-quantized after every step so the
// in-memory values always match what a checkpoint would store.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "swerve/checkpoint.hpp"
#include "swerve/mlp.hpp"
#include "swerve/policy.hpp"

namespace swerve {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

namespace detail {

inline void adam_tensor(std::vector<double>& param, const std::vector<double>& grad,
                        std::vector<double>& m, std::vector<double>& v, const AdamConfig& cfg,
                        double bias1, double bias2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    param[i] = quantize_f32(param[i] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    m[i] = quantize_f32(m[i]);
    v[i] = quantize_f32(v[i]);
  }
}

}  // namespace detail

// Gradients for every trainable tensor of the policy.
struct PolicyGrads {
  MlpGrads actor;
  MlpGrads critic;
  std::array<double, kActionDim> log_std{};

  explicit PolicyGrads(const PolicyParams& p) : actor(p.actor), critic(p.critic) {}

  void zero() {
    actor.zero();
    critic.zero();
    log_std.fill(0.0);
  }

  void scale(double s) {
    actor.scale(s);
    critic.scale(s);
    for (double& x : log_std) x *= s;
  }
};

// One optimizer step over all tensors (shared step counter).
inline void adam_step(PolicyParams& p, const PolicyGrads& g, TrainerState& state,
                      const AdamConfig& cfg) {
  state.adam_step += 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.adam_step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.adam_step));

  for (std::size_t l = 0; l < p.actor.layer_count(); ++l) {
    detail::adam_tensor(p.actor.weights[l], g.actor.weights[l], state.actor_m_w[l],
                        state.actor_v_w[l], cfg, bias1, bias2);
    detail::adam_tensor(p.actor.biases[l], g.actor.biases[l], state.actor_m_b[l],
                        state.actor_v_b[l], cfg, bias1, bias2);
  }
  for (std::size_t l = 0; l < p.critic.layer_count(); ++l) {
    detail::adam_tensor(p.critic.weights[l], g.critic.weights[l], state.critic_m_w[l],
                        state.critic_v_w[l], cfg, bias1, bias2);
    detail::adam_tensor(p.critic.biases[l], g.critic.biases[l], state.critic_m_b[l],
                        state.critic_v_b[l], cfg, bias1, bias2);
  }
  for (int d = 0; d < kActionDim; ++d) {
    const double grad = g.log_std[d];
    double& m = state.log_std_m[d];
    double& v = state.log_std_v[d];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    p.log_std[d] =
        quantize_f32(p.log_std[d] - cfg.lr * (m / bias1) / (std::sqrt(v / bias2) + cfg.eps));
    m = quantize_f32(m);
    v = quantize_f32(v);
  }
}

}  // namespace swerve
