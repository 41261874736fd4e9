#pragma once

// Generalized advantage estimation over a rollout segment.
//
// Both termination kinds cut the advantage recursion (no leakage across
// episode boundaries); they differ in the successor value used for the
// temporal difference at the cut:
//   terminal  (collision / off-track): successor value 0 — the lost future
//             reward is the implicit penalty,
//   truncated (time limit / segment end): successor value is the critic
//             estimate of the actual next state, stored per step.
// A step that is neither flag uses the next entry's value; the last step of a
// non-terminal segment uses `final_bootstrap`.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace swerve {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

inline GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                             const std::vector<std::uint8_t>& terminal,
                             const std::vector<std::uint8_t>& truncated,
                             const std::vector<double>& truncation_values, double final_bootstrap,
                             double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || terminal.size() != n || truncated.size() != n ||
      truncation_values.size() != n) {
    throw std::invalid_argument("compute_gae: sequence length mismatch");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (terminal[t] && truncated[t]) {
      throw std::invalid_argument("compute_gae: step flagged both terminal and truncated");
    }
  }

  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_advantage = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double next_value;
    if (terminal[i]) {
      next_value = 0.0;
    } else if (truncated[i]) {
      next_value = truncation_values[i];
    } else if (i + 1 < n) {
      next_value = values[i + 1];
    } else {
      next_value = final_bootstrap;
    }
    const bool episode_end = terminal[i] || truncated[i];
    const double delta = rewards[i] + gamma * next_value - values[i];
    const double adv = delta + (episode_end ? 0.0 : gamma * lambda * next_advantage);
    out.advantages[i] = adv;
    out.returns[i] = adv + values[i];
    next_advantage = adv;
  }
  return out;
}

}  // namespace swerve
