#pragma once

// Run configuration: JSON file with defaults for every module knob, loaded,
// validated (every problem reported, not just the first) and echoed back as
// the resolved effective config. Seeds are explicit; there is no wall-clock
// default anywhere.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swerve/agents.hpp"
#include "swerve/dynamics.hpp"
#include "swerve/env.hpp"
#include "swerve/mpc.hpp"
#include "swerve/ppo.hpp"
#include "swerve/scenario.hpp"

namespace swerve {

struct ScenarioConfig {
  int trials = 10;
  double obstacle_speed = 1.0;
  double ego_speed = 1.0;
  double timeout_s = 15.0;
  double jitter_pos = 0.2;
  double jitter_delay = 0.2;
  double spawn_distance = 6.0;
  double ego_vmax = 2.0;
};

struct RunConfig {
  std::string scene = "racetrack";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  HeadingMode mode = HeadingMode::Default;
  VehicleParams vehicle{};
  EnvConfig env{};
  PpoConfig ppo{};
  MpcConfig mpc{};
  ApfCost apf{};
  ScenarioConfig scenario{};
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  detail::get_if_present(j, "scene", c.scene);
  detail::get_if_present(j, "seed", c.seed);
  detail::get_if_present(j, "out_dir", c.out_dir);
  if (j.contains("mode")) {
    const std::string m = j.at("mode").get<std::string>();
    if (m == "default") {
      c.mode = HeadingMode::Default;
    } else if (m == "reversed") {
      c.mode = HeadingMode::Reversed;
    } else {
      throw ConfigError("config: mode must be 'default' or 'reversed', got '" + m + "'");
    }
  }
  if (j.contains("vehicle")) {
    const auto& v = j.at("vehicle");
    detail::get_if_present(v, "wheelbase", c.vehicle.wheelbase);
    detail::get_if_present(v, "mass", c.vehicle.mass);
    detail::get_if_present(v, "max_speed", c.vehicle.max_speed);
    detail::get_if_present(v, "delta_min", c.vehicle.delta_min);
    detail::get_if_present(v, "delta_max", c.vehicle.delta_max);
    detail::get_if_present(v, "motor_gain", c.vehicle.motor_gain);
    detail::get_if_present(v, "drag_coeff", c.vehicle.drag_coeff);
    detail::get_if_present(v, "rolling_resist", c.vehicle.rolling_resist);
    detail::get_if_present(v, "mu_g", c.vehicle.mu_g);
    detail::get_if_present(v, "dt", c.vehicle.dt);
  }
  if (j.contains("env")) {
    const auto& e = j.at("env");
    detail::get_if_present(e, "n_obstacles", c.env.spawn.n_obstacles);
    detail::get_if_present(e, "speed_advantage", c.env.spawn.speed_advantage);
    detail::get_if_present(e, "spawn_jitter_frac", c.env.spawn.spawn_jitter_frac);
    detail::get_if_present(e, "target_speed_scale", c.env.spawn.target_speed_scale);
    detail::get_if_present(e, "lookahead", c.env.spawn.lookahead);
    detail::get_if_present(e, "throttle_kp", c.env.spawn.throttle_kp);
    detail::get_if_present(e, "footprint_half_length", c.env.spawn.footprint.half_length);
    detail::get_if_present(e, "footprint_half_width", c.env.spawn.footprint.half_width);
    detail::get_if_present(e, "max_range", c.env.max_range);
    detail::get_if_present(e, "episode_cap", c.env.episode_cap);
    detail::get_if_present(e, "offtrack_terminates", c.env.offtrack_terminates);
  }
  if (j.contains("ppo")) {
    const auto& p = j.at("ppo");
    detail::get_if_present(p, "epochs", c.ppo.epochs);
    detail::get_if_present(p, "minibatch", c.ppo.minibatch);
    detail::get_if_present(p, "rollout", c.ppo.rollout);
    detail::get_if_present(p, "gamma", c.ppo.gamma);
    detail::get_if_present(p, "lr", c.ppo.lr);
    detail::get_if_present(p, "gae_lambda", c.ppo.gae_lambda);
    detail::get_if_present(p, "clip_eps", c.ppo.clip_eps);
    detail::get_if_present(p, "value_coeff", c.ppo.value_coeff);
    detail::get_if_present(p, "entropy_coeff", c.ppo.entropy_coeff);
    detail::get_if_present(p, "total_steps", c.ppo.total_steps);
    detail::get_if_present(p, "checkpoint_interval", c.ppo.checkpoint_interval);
    detail::get_if_present(p, "workers", c.ppo.workers);
  }
  if (j.contains("mpc")) {
    const auto& m = j.at("mpc");
    detail::get_if_present(m, "dt", c.mpc.dt);
    detail::get_if_present(m, "max_iters", c.mpc.max_iters);
    detail::get_if_present(m, "rel_tol", c.mpc.rel_tol);
    detail::get_if_present(m, "alpha0", c.mpc.alpha0);
    detail::get_if_present(m, "q_obs", c.apf.q_obs);
    detail::get_if_present(m, "q_bound", c.apf.q_bound);
    detail::get_if_present(m, "eps_d", c.apf.eps_d);
    detail::get_if_present(m, "w_ctrl", c.apf.w_ctrl);
    detail::get_if_present(m, "w_prog", c.apf.w_prog);
  }
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    detail::get_if_present(s, "trials", c.scenario.trials);
    detail::get_if_present(s, "obstacle_speed", c.scenario.obstacle_speed);
    detail::get_if_present(s, "ego_speed", c.scenario.ego_speed);
    detail::get_if_present(s, "timeout_s", c.scenario.timeout_s);
    detail::get_if_present(s, "jitter_pos", c.scenario.jitter_pos);
    detail::get_if_present(s, "jitter_delay", c.scenario.jitter_delay);
    detail::get_if_present(s, "spawn_distance", c.scenario.spawn_distance);
    detail::get_if_present(s, "ego_vmax", c.scenario.ego_vmax);
  }
  c.env.vehicle = c.vehicle;
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse error in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// Collects every violation; throws one error listing all of them.
inline void validate_config(const RunConfig& c) {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  check(c.vehicle.wheelbase > 0.0, "vehicle.wheelbase must be > 0");
  check(c.vehicle.mass > 0.0, "vehicle.mass must be > 0");
  check(c.vehicle.dt > 0.0, "vehicle.dt must be > 0");
  check(c.vehicle.max_speed > 0.0, "vehicle.max_speed must be > 0");
  check(c.vehicle.mu_g > 0.0, "vehicle.mu_g must be > 0");
  check(c.vehicle.delta_min < 0.0 && 0.0 < c.vehicle.delta_max,
        "vehicle steering range must satisfy delta_min < 0 < delta_max");
  check(c.env.spawn.n_obstacles >= 0, "env.n_obstacles must be >= 0");
  check(c.env.spawn.speed_advantage > 0.0, "env.speed_advantage must be > 0");
  check(c.env.spawn.target_speed_scale > 0.0 && c.env.spawn.target_speed_scale <= 1.0,
        "env.target_speed_scale must be in (0, 1]");
  check(c.env.spawn.lookahead > 0.0, "env.lookahead must be > 0");
  check(c.env.spawn.footprint.half_length > 0.0 && c.env.spawn.footprint.half_width > 0.0,
        "env.footprint must be positive");
  check(c.env.max_range > 0.0, "env.max_range must be > 0");
  check(c.env.episode_cap > 0, "env.episode_cap must be > 0");
  check(c.scenario.trials >= 1, "scenario.trials must be >= 1");
  check(c.scenario.obstacle_speed >= 0.0, "scenario.obstacle_speed must be >= 0");
  check(c.scenario.timeout_s > 0.0, "scenario.timeout_s must be > 0");
  check(c.apf.eps_d > 0.0, "mpc.eps_d must be > 0");
  check(c.apf.q_obs >= 0.0 && c.apf.q_bound >= 0.0 && c.apf.w_ctrl >= 0.0 && c.apf.w_prog >= 0.0,
        "mpc cost weights must be >= 0");
  check(c.mpc.dt > 0.0, "mpc.dt must be > 0");
  check(c.mpc.max_iters > 0, "mpc.max_iters must be > 0");

  if (c.scene != "racetrack" && c.scene != "intersection") {
    check(std::filesystem::exists(c.scene), "scene file does not exist: " + c.scene);
  }
  try {
    c.ppo.validate();
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }

  if (!problems.empty()) {
    std::ostringstream os;
    os << "config: " << problems.size() << " problem(s):";
    for (const std::string& p : problems) os << "\n  - " << p;
    throw ConfigError(os.str());
  }
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["scene"] = c.scene;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["mode"] = to_string(c.mode);
  j["vehicle"] = {{"wheelbase", c.vehicle.wheelbase},
                  {"mass", c.vehicle.mass},
                  {"max_speed", c.vehicle.max_speed},
                  {"delta_min", c.vehicle.delta_min},
                  {"delta_max", c.vehicle.delta_max},
                  {"motor_gain", c.vehicle.motor_gain},
                  {"drag_coeff", c.vehicle.drag_coeff},
                  {"rolling_resist", c.vehicle.rolling_resist},
                  {"mu_g", c.vehicle.mu_g},
                  {"dt", c.vehicle.dt}};
  j["env"] = {{"n_obstacles", c.env.spawn.n_obstacles},
              {"speed_advantage", c.env.spawn.speed_advantage},
              {"spawn_jitter_frac", c.env.spawn.spawn_jitter_frac},
              {"target_speed_scale", c.env.spawn.target_speed_scale},
              {"lookahead", c.env.spawn.lookahead},
              {"throttle_kp", c.env.spawn.throttle_kp},
              {"footprint_half_length", c.env.spawn.footprint.half_length},
              {"footprint_half_width", c.env.spawn.footprint.half_width},
              {"max_range", c.env.max_range},
              {"episode_cap", c.env.episode_cap},
              {"offtrack_terminates", c.env.offtrack_terminates}};
  j["ppo"] = {{"epochs", c.ppo.epochs},
              {"minibatch", c.ppo.minibatch},
              {"rollout", c.ppo.rollout},
              {"gamma", c.ppo.gamma},
              {"lr", c.ppo.lr},
              {"gae_lambda", c.ppo.gae_lambda},
              {"clip_eps", c.ppo.clip_eps},
              {"value_coeff", c.ppo.value_coeff},
              {"entropy_coeff", c.ppo.entropy_coeff},
              {"total_steps", c.ppo.total_steps},
              {"checkpoint_interval", c.ppo.checkpoint_interval},
              {"workers", c.ppo.workers}};
  j["mpc"] = {{"dt", c.mpc.dt},          {"max_iters", c.mpc.max_iters},
              {"rel_tol", c.mpc.rel_tol}, {"alpha0", c.mpc.alpha0},
              {"q_obs", c.apf.q_obs},     {"q_bound", c.apf.q_bound},
              {"eps_d", c.apf.eps_d},     {"w_ctrl", c.apf.w_ctrl},
              {"w_prog", c.apf.w_prog}};
  j["scenario"] = {{"trials", c.scenario.trials},
                   {"obstacle_speed", c.scenario.obstacle_speed},
                   {"ego_speed", c.scenario.ego_speed},
                   {"timeout_s", c.scenario.timeout_s},
                   {"jitter_pos", c.scenario.jitter_pos},
                   {"jitter_delay", c.scenario.jitter_delay},
                   {"spawn_distance", c.scenario.spawn_distance},
                   {"ego_vmax", c.scenario.ego_vmax}};
  return j;
}

// The resolved configuration every command echoes into its output directory.
inline void write_effective_config(const RunConfig& c, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / "effective_config.json").string();
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write '" + path + "'");
  out << config_to_json(c).dump(2) << "\n";
}

inline Scenario make_scenario(const RunConfig& c, ScenarioDirection dir) {
  Scenario sc;
  sc.direction = dir;
  sc.obstacle_speed = c.scenario.obstacle_speed;
  sc.ego_speed = c.scenario.ego_speed;
  sc.trials = c.scenario.trials;
  sc.jitter_pos = c.scenario.jitter_pos;
  sc.jitter_delay = c.scenario.jitter_delay;
  sc.timeout_s = c.scenario.timeout_s;
  sc.spawn_distance = c.scenario.spawn_distance;
  sc.ego_vmax = c.scenario.ego_vmax;
  return sc;
}

}  // namespace swerve
