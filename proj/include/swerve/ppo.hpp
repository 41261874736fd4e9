#pragma once

// Proximal Policy Optimization, self-contained: rollout collection (optionally
// across parallel single-threaded workers merged in worker order), GAE,
// clipped surrogate + value loss with gradients pushed through the MLPs by
// hand, Adam, checkpoint cadence and a training-curve CSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "swerve/adam.hpp"
#include "swerve/checkpoint.hpp"
#include "swerve/env.hpp"
#include "swerve/gae.hpp"
#include "swerve/policy.hpp"
#include "swerve/rng.hpp"

namespace swerve {

struct PpoConfig {
  int epochs = 10;
  int minibatch = 64;
  int rollout = 2048;
  double gamma = 0.99;
  double lr = 3e-4;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double value_coeff = 0.5;
  double entropy_coeff = 0.0;
  std::int64_t total_steps = 2'000'000;
  std::int64_t checkpoint_interval = 5'000'000;
  int workers = 1;

  void validate() const {
    if (epochs <= 0) throw std::invalid_argument("ppo: epochs must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo: gamma out of (0,1]");
    if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
      throw std::invalid_argument("ppo: gae_lambda out of (0,1]");
    }
    if (!(clip_eps > 0.0)) throw std::invalid_argument("ppo: clip_eps must be positive");
    if (minibatch <= 0 || rollout <= 0 || rollout % minibatch != 0) {
      throw std::invalid_argument("ppo: minibatch must divide rollout size");
    }
    if (workers <= 0 || rollout % workers != 0) {
      throw std::invalid_argument("ppo: workers must divide rollout size");
    }
  }
};

// Fixed-size store of transitions collected with one policy snapshot.
// `boot_values` is nonzero only on truncated steps (critic value of the state
// the episode was cut from); terminal steps always contribute 0 there.
struct RolloutBuffer {
  std::vector<std::array<double, kScanRays>> observations;
  std::vector<std::array<double, kActionDim>> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> terminal;
  std::vector<std::uint8_t> truncated;
  std::vector<double> boot_values;
  double final_bootstrap = 0.0;

  std::size_t size() const { return rewards.size(); }

  void reserve(std::size_t n) {
    observations.reserve(n);
    actions.reserve(n);
    log_probs.reserve(n);
    rewards.reserve(n);
    values.reserve(n);
    terminal.reserve(n);
    truncated.reserve(n);
    boot_values.reserve(n);
  }

  void clear() {
    observations.clear();
    actions.clear();
    log_probs.clear();
    rewards.clear();
    values.clear();
    terminal.clear();
    truncated.clear();
    boot_values.clear();
    final_bootstrap = 0.0;
  }
};

struct EpisodeStats {
  double reward_sum = 0.0;
  int length = 0;
  Termination ending = Termination::Running;
};

// One worker: steps its own environment `steps` times with the given policy
// snapshot, resetting (with seeds derived from its stream) whenever an
// episode ends. Completed episodes are appended to `episodes`.
class RolloutWorker {
 public:
  RolloutWorker(const SceneGeometry& scene, const EnvConfig& cfg, HeadingMode mode,
                std::uint64_t master_seed, int worker_index)
      : env_(scene, cfg),
        mode_(mode),
        rng_(mix_seed(master_seed, 0xA11CE, static_cast<std::uint64_t>(worker_index))),
        reset_seed_base_(mix_seed(master_seed, 0x5EED, static_cast<std::uint64_t>(worker_index))) {}

  void collect(const PolicyParams& policy, int steps, RolloutBuffer& buffer,
               std::vector<EpisodeStats>& episodes) {
    buffer.clear();
    buffer.reserve(static_cast<std::size_t>(steps));
    if (!started_) {
      obs_ = env_.reset(mode_, next_reset_seed());
      started_ = true;
      episode_ = {};
    }
    for (int i = 0; i < steps; ++i) {
      const SampledAction act = sample_action(policy, obs_, rng_);
      const Transition tr = env_.step({act.raw.a_throttle, act.raw.a_steer});

      buffer.observations.push_back(obs_.ranges);
      buffer.actions.push_back({act.raw.a_throttle, act.raw.a_steer});
      buffer.log_probs.push_back(act.log_prob);
      buffer.rewards.push_back(tr.reward);
      buffer.values.push_back(act.value);
      const bool terminal =
          tr.termination == Termination::Collision || tr.termination == Termination::OffTrack;
      const bool truncated = tr.termination == Termination::TimeLimit;
      buffer.terminal.push_back(terminal ? 1 : 0);
      buffer.truncated.push_back(truncated ? 1 : 0);
      buffer.boot_values.push_back(truncated ? critic_value(policy, tr.observation) : 0.0);

      episode_.reward_sum += tr.reward;
      episode_.length += 1;

      if (terminal || truncated) {
        episode_.ending = tr.termination;
        episodes.push_back(episode_);
        episode_ = {};
        obs_ = env_.reset(mode_, next_reset_seed());
      } else {
        obs_ = tr.observation;
      }
    }
    // Mid-episode cut at the end of the segment: bootstrap with the value of
    // the state the next segment will continue from.
    buffer.final_bootstrap =
        (buffer.size() > 0 && !buffer.terminal.back() && !buffer.truncated.back())
            ? critic_value(policy, obs_)
            : 0.0;
  }

  Env& env() { return env_; }

 private:
  std::uint64_t next_reset_seed() { return mix_seed(reset_seed_base_, episode_counter_++); }

  Env env_;
  HeadingMode mode_;
  Rng rng_;
  std::uint64_t reset_seed_base_;
  std::uint64_t episode_counter_ = 0;
  DepthScan obs_;
  EpisodeStats episode_{};
  bool started_ = false;
};

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
};

namespace detail {

struct FlatBatch {
  std::vector<const RolloutBuffer*> buffers;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<std::size_t> buffer_of;  // flat index -> buffer
  std::vector<std::size_t> index_in;   // flat index -> index inside buffer

  std::size_t size() const { return advantages.size(); }
};

inline FlatBatch flatten_with_gae(const std::vector<const RolloutBuffer*>& buffers, double gamma,
                                  double lambda) {
  FlatBatch flat{buffers, {}, {}, {}, {}};
  for (std::size_t b = 0; b < buffers.size(); ++b) {
    const RolloutBuffer& buf = *buffers[b];
    const GaeResult gae =
        compute_gae(buf.rewards, buf.values, buf.terminal, buf.truncated, buf.boot_values,
                    buf.final_bootstrap, gamma, lambda);
    for (std::size_t i = 0; i < buf.size(); ++i) {
      flat.advantages.push_back(gae.advantages[i]);
      flat.returns.push_back(gae.returns[i]);
      flat.buffer_of.push_back(b);
      flat.index_in.push_back(i);
    }
  }
  return flat;
}

}  // namespace detail

// One training sample as seen by the loss: observation, the action taken, the
// behavior policy's log-prob, the (already normalized) advantage, and the
// return target.
struct PpoSample {
  const double* obs = nullptr;
  std::size_t obs_size = 0;
  std::array<double, kActionDim> action{};
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct PpoLossBreakdown {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Mean PPO loss over one minibatch:
//   -min(ratio A, clip(ratio, 1 +- eps) A) + value_coeff (ret - v)^2
//   - entropy_coeff * entropy.
// When `grads` is non-null the exact gradient w.r.t. every actor/critic
// parameter and log_std accumulates into it (scaled to the minibatch mean).
// Inside the clip band both min() branches coincide; when the clipped branch
// wins, the ratio sits outside the band where the clamp is flat, so the
// surrogate gradient there is exactly zero.
inline PpoLossBreakdown ppo_minibatch_loss(const PolicyParams& policy,
                                           const std::vector<PpoSample>& batch,
                                           const PpoConfig& cfg, PolicyGrads* grads) {
  if (batch.empty()) throw std::invalid_argument("ppo_minibatch_loss: empty batch");
  PpoLossBreakdown out;
  MlpCache actor_cache, critic_cache;
  std::vector<double> actor_out, critic_out;
  std::vector<double> dmu(kActionDim);
  double clip_hits = 0.0;

  for (const PpoSample& s : batch) {
    forward(policy.actor, s.obs, s.obs_size, actor_out, grads ? &actor_cache : nullptr);
    const std::array<double, kActionDim> mu = {actor_out[0], actor_out[1]};
    const double new_logp = gaussian_log_prob(policy, mu, s.action);
    const double ratio = std::exp(new_logp - s.old_log_prob);

    const double unclipped = ratio * s.advantage;
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * s.advantage;
    out.policy += -std::min(unclipped, clipped);
    if (ratio < 1.0 - cfg.clip_eps || ratio > 1.0 + cfg.clip_eps) clip_hits += 1.0;

    forward(policy.critic, s.obs, s.obs_size, critic_out, grads ? &critic_cache : nullptr);
    const double verr = s.ret - critic_out[0];
    out.value += cfg.value_coeff * verr * verr;

    if (grads) {
      const double dloss_dlogp = unclipped <= clipped ? -s.advantage * ratio : 0.0;
      for (int d = 0; d < kActionDim; ++d) {
        const double sigma = std::exp(policy.log_std[d]);
        const double z = (s.action[d] - mu[d]) / sigma;
        // dlogp/dmu = z / sigma ; dlogp/dlog_std = z^2 - 1
        dmu[d] = dloss_dlogp * (z / sigma);
        grads->log_std[d] += dloss_dlogp * (z * z - 1.0) - cfg.entropy_coeff;
      }
      backward(policy.actor, actor_cache, dmu, grads->actor);
      backward(policy.critic, critic_cache, {cfg.value_coeff * -2.0 * verr}, grads->critic);
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  if (grads) grads->scale(inv);
  out.policy *= inv;
  out.value *= inv;
  out.entropy = gaussian_entropy(policy);
  out.clip_fraction = clip_hits * inv;
  out.total = out.policy + out.value - cfg.entropy_coeff * out.entropy;
  return out;
}

// Normalizes advantages to zero mean / unit standard deviation (population)
// in place.
inline void normalize_advantages(std::vector<PpoSample>& batch) {
  double mean = 0.0;
  for (const PpoSample& s : batch) mean += s.advantage;
  mean /= static_cast<double>(batch.size());
  double var = 0.0;
  for (const PpoSample& s : batch) {
    const double d = s.advantage - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / static_cast<double>(batch.size()));
  for (PpoSample& s : batch) s.advantage = (s.advantage - mean) / (stddev + 1e-8);
}

// One PPO update over a full rollout (possibly several per-worker buffers,
// merged in worker order). Advantages are normalized per minibatch; the
// clipped surrogate, value loss and entropy term are differentiated by hand
// through both MLPs and log_std.
inline LossStats ppo_update(PolicyParams& policy, TrainerState& trainer,
                            const std::vector<const RolloutBuffer*>& buffers,
                            const PpoConfig& cfg, Rng& rng) {
  detail::FlatBatch flat = detail::flatten_with_gae(buffers, cfg.gamma, cfg.gae_lambda);
  const std::size_t n = flat.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty rollout");
  if (n % static_cast<std::size_t>(cfg.minibatch) != 0) {
    throw std::invalid_argument("ppo_update: rollout not divisible by minibatch");
  }

  const AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};
  PolicyGrads grads(policy);
  LossStats stats;
  double clip_fraction_sum = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<PpoSample> batch(static_cast<std::size_t>(cfg.minibatch));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch)) {
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const std::size_t i = order[start + k];
        const RolloutBuffer& buf = *flat.buffers[flat.buffer_of[i]];
        const std::size_t j = flat.index_in[i];
        batch[k].obs = buf.observations[j].data();
        batch[k].obs_size = buf.observations[j].size();
        batch[k].action = buf.actions[j];
        batch[k].old_log_prob = buf.log_probs[j];
        batch[k].advantage = flat.advantages[i];
        batch[k].ret = flat.returns[i];
      }
      normalize_advantages(batch);

      grads.zero();
      const PpoLossBreakdown loss = ppo_minibatch_loss(policy, batch, cfg, &grads);
      if (!std::isfinite(loss.total)) {
        throw std::runtime_error("ppo_update: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", minibatch " +
                                 std::to_string(start / static_cast<std::size_t>(cfg.minibatch)));
      }
      adam_step(policy, grads, trainer, adam_cfg);

      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      clip_fraction_sum += loss.clip_fraction;
      stats.minibatches += 1;
    }
  }

  const double inv = stats.minibatches > 0 ? 1.0 / stats.minibatches : 0.0;
  stats.policy_loss *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.clip_fraction = clip_fraction_sum * inv;
  return stats;
}

struct TrainOptions {
  HeadingMode mode = HeadingMode::Reversed;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string resume_path;  // optional checkpoint to continue from
  bool quiet = false;
};

struct TrainResult {
  std::vector<std::string> checkpoint_paths;
  std::string curve_path;
  std::int64_t total_steps = 0;
  double final_mean_reward = 0.0;
};

// The full training loop: alternate rollout collection (workers merged in
// index order) and ppo_update until total_steps, saving numbered checkpoints
// every checkpoint_interval steps and appending one training-curve row per
// update.
inline TrainResult train(const SceneGeometry& scene, const EnvConfig& env_cfg,
                         const PpoConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);

  Rng init_rng(mix_seed(opts.seed, 0xF00D));
  PolicyParams policy = make_policy(init_rng);
  TrainerState trainer = TrainerState::zeros_like(policy);
  if (!opts.resume_path.empty()) {
    LoadedCheckpoint loaded = load_checkpoint(opts.resume_path);
    policy = std::move(loaded.policy);
    if (loaded.trainer) trainer = std::move(*loaded.trainer);
  }

  Rng update_rng(mix_seed(opts.seed, 0xBA7C4));

  std::vector<std::unique_ptr<RolloutWorker>> workers;
  for (int w = 0; w < cfg.workers; ++w) {
    workers.push_back(std::make_unique<RolloutWorker>(scene, env_cfg, opts.mode, opts.seed, w));
  }
  std::vector<RolloutBuffer> buffers(workers.size());
  std::vector<std::vector<EpisodeStats>> episode_lists(workers.size());
  const int chunk = cfg.rollout / cfg.workers;

  TrainResult result;
  result.curve_path = (fs::path(opts.out_dir) / "curves.csv").string();
  std::ofstream curve(result.curve_path, trainer.global_step > 0 ? std::ios::app : std::ios::out);
  if (!curve) throw std::runtime_error("train: cannot write " + result.curve_path);
  if (trainer.global_step == 0) {
    curve << "step,mean_episode_reward,mean_episode_length,collision_rate\n";
  }

  std::deque<EpisodeStats> recent;  // smoothing window for the curve
  constexpr std::size_t kWindow = 50;
  std::int64_t collisions_total = 0;

  auto save_numbered = [&](std::int64_t step) {
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_%011lld.bin", static_cast<long long>(step));
    const std::string path = (fs::path(opts.out_dir) / name).string();
    save_checkpoint(path, policy, &trainer);
    result.checkpoint_paths.push_back(path);
  };

  std::int64_t next_checkpoint =
      (trainer.global_step / cfg.checkpoint_interval + 1) * cfg.checkpoint_interval;

  while (static_cast<std::int64_t>(trainer.global_step) < cfg.total_steps) {
    // Rollout phase: N single-threaded workers over read-only snapshots.
    const PolicyParams snapshot = policy;
    if (cfg.workers == 1) {
      episode_lists[0].clear();
      workers[0]->collect(snapshot, chunk, buffers[0], episode_lists[0]);
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < cfg.workers; ++w) {
        episode_lists[w].clear();
        threads.emplace_back([&, w] {
          workers[w]->collect(snapshot, chunk, buffers[w], episode_lists[w]);
        });
      }
      for (auto& t : threads) t.join();
    }

    std::vector<const RolloutBuffer*> merged;
    for (const RolloutBuffer& b : buffers) merged.push_back(&b);
    for (const auto& list : episode_lists) {
      for (const EpisodeStats& ep : list) {
        recent.push_back(ep);
        if (recent.size() > kWindow) recent.pop_front();
        if (ep.ending == Termination::Collision) collisions_total += 1;
      }
    }

    const LossStats stats = ppo_update(policy, trainer, merged, cfg, update_rng);
    trainer.global_step += static_cast<std::uint64_t>(cfg.rollout);

    double mean_reward = 0.0, mean_length = 0.0, collision_rate = 0.0;
    if (!recent.empty()) {
      for (const EpisodeStats& ep : recent) {
        mean_reward += ep.reward_sum;
        mean_length += ep.length;
        collision_rate += ep.ending == Termination::Collision ? 1.0 : 0.0;
      }
      mean_reward /= static_cast<double>(recent.size());
      mean_length /= static_cast<double>(recent.size());
      collision_rate /= static_cast<double>(recent.size());
    }
    curve << trainer.global_step << ',' << mean_reward << ',' << mean_length << ','
          << collision_rate << '\n';
    curve.flush();
    result.final_mean_reward = mean_reward;

    if (!opts.quiet) {
      const double coll_per_1e4 =
          trainer.global_step > 0
              ? 1e4 * static_cast<double>(collisions_total) / static_cast<double>(trainer.global_step)
              : 0.0;
      std::cout << "step " << trainer.global_step << "  mean_ep_reward " << mean_reward
                << "  mean_ep_len " << mean_length << "  collisions/1e4 " << coll_per_1e4
                << "  pi_loss " << stats.policy_loss << "  v_loss " << stats.value_loss
                << std::endl;
    }

    while (static_cast<std::int64_t>(trainer.global_step) >= next_checkpoint) {
      save_numbered(next_checkpoint);
      next_checkpoint += cfg.checkpoint_interval;
    }
  }

  const std::string final_path = (fs::path(opts.out_dir) / "ckpt_final.bin").string();
  save_checkpoint(final_path, policy, &trainer);
  result.checkpoint_paths.push_back(final_path);
  result.total_steps = static_cast<std::int64_t>(trainer.global_step);
  return result;
}

}  // namespace swerve
