// Command-line entry point: train / eval / bench subcommands over one
// reproducible JSON config with flag overrides. Exit status is 0 iff no trial
// aborted and every file write succeeded.

#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swerve/swerve.hpp"

namespace fs = std::filesystem;
using namespace swerve;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> out;
};

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.mode) {
    if (*flags.mode == "default") {
      cfg.mode = HeadingMode::Default;
    } else if (*flags.mode == "reversed") {
      cfg.mode = HeadingMode::Reversed;
    } else {
      throw ConfigError("config: --mode must be 'default' or 'reversed'");
    }
  }
  return cfg;
}

std::unique_ptr<EgoController> make_controller(const std::string& spec, const RunConfig& cfg) {
  if (spec == "mpc-apf") {
    return std::make_unique<MpcEgoController>(cfg.vehicle, cfg.apf, cfg.mpc);
  }
  if (spec == "straight") {
    return std::make_unique<StraightEgoController>();
  }
  if (spec.rfind("ckpt:", 0) == 0) {
    const std::string path = spec.substr(5);
    LoadedCheckpoint loaded = load_checkpoint(path);  // checkpoint errors surface verbatim
    return std::make_unique<PolicyEgoController>(std::move(loaded.policy), cfg.vehicle,
                                                 "drl:" + fs::path(path).stem().string());
  }
  throw ConfigError("unknown controller spec '" + spec +
                    "' (expected mpc-apf, straight, or ckpt:<path>)");
}

std::vector<ScenarioDirection> parse_directions(const std::vector<std::string>& specs) {
  if (specs.empty() || (specs.size() == 1 && specs[0] == "all")) {
    return {ScenarioDirection::RightToLeft, ScenarioDirection::HeadToHead,
            ScenarioDirection::LeftToRight};
  }
  std::vector<ScenarioDirection> out;
  for (const std::string& s : specs) {
    if (s == "r2l") {
      out.push_back(ScenarioDirection::RightToLeft);
    } else if (s == "h2h") {
      out.push_back(ScenarioDirection::HeadToHead);
    } else if (s == "l2r") {
      out.push_back(ScenarioDirection::LeftToRight);
    } else {
      throw ConfigError("unknown scenario '" + s + "' (expected r2l, h2h, l2r, all)");
    }
  }
  return out;
}

int cmd_train(const CommonFlags& flags, std::optional<std::int64_t> total_steps,
              const std::string& resume) {
  RunConfig cfg = resolve_config(flags);
  if (total_steps) cfg.ppo.total_steps = *total_steps;
  validate_config(cfg);
  const SceneGeometry scene = resolve_scene(cfg.scene);

  write_effective_config(cfg, cfg.out_dir);
  TrainOptions opts;
  opts.mode = cfg.mode;
  opts.seed = cfg.seed;
  opts.out_dir = cfg.out_dir;
  opts.resume_path = resume;
  const TrainResult result = train(scene, cfg.env, cfg.ppo, opts);
  std::cout << "training finished at step " << result.total_steps << "; "
            << result.checkpoint_paths.size() << " checkpoint(s), curve: " << result.curve_path
            << std::endl;
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::vector<std::string>& controller_specs,
             const std::vector<std::string>& scenario_specs) {
  RunConfig cfg = resolve_config(flags);
  validate_config(cfg);
  if (controller_specs.empty()) throw ConfigError("eval: at least one --controller required");
  const SceneGeometry scene = make_intersection_scene();
  const auto directions = parse_directions(scenario_specs);

  write_effective_config(cfg, cfg.out_dir);
  RunScenarioOptions opts;
  opts.vehicle = cfg.vehicle;
  opts.footprint = cfg.env.spawn.footprint;
  opts.max_range = cfg.env.max_range;

  ResultTableInput table_input;
  bool any_aborted = false;
  for (const std::string& spec : controller_specs) {
    auto controller = make_controller(spec, cfg);
    for (ScenarioDirection dir : directions) {
      const Scenario sc = make_scenario(cfg, dir);
      ScenarioResult result;
      try {
        result = run_scenario(*controller, sc, scene, cfg.seed, opts);
      } catch (const std::exception& e) {
        std::cerr << "trial aborted for " << controller->name() << " / " << to_string(dir)
                  << ": " << e.what() << std::endl;
        any_aborted = true;
        continue;
      }
      const fs::path trial_dir = fs::path(cfg.out_dir) / "trials" / to_string(dir);
      const fs::path plot_dir = fs::path(cfg.out_dir) / "plots";
      fs::create_directories(trial_dir);
      fs::create_directories(plot_dir);
      for (std::size_t t = 0; t < result.trials.size(); ++t) {
        const std::string base = controller->name() + "_" + std::to_string(t);
        write_trial_csv(result.trials[t], (trial_dir / (base + ".csv")).string());
        write_trial_svg(result.trials[t], scene,
                        (plot_dir / (to_string(dir) + std::string("_") + base + ".svg")).string());
      }
      std::cout << controller->name() << "  " << direction_label(dir) << "  "
                << result.success_rate_percent() << "% (" << result.successes << "/"
                << result.trials.size() << ", timeouts " << result.timeouts << ")" << std::endl;
      table_input[controller->name()][dir] = std::move(result);
    }
    // MPC telemetry CSV, one per controller that produces it
    if (auto* mpc = dynamic_cast<MpcEgoController*>(controller.get())) {
      mpc->reset();
      const auto rows = mpc->collected_telemetry();
      std::ofstream tel(fs::path(cfg.out_dir) / "mpc_telemetry.csv");
      tel << "step,iterations,cost_initial,cost_final,wall_ns\n";
      for (const auto& r : rows) {
        tel << r.step << ',' << r.iterations << ',' << r.cost_initial << ',' << r.cost_final
            << ',' << r.wall_ns << '\n';
      }
    }
  }

  if (!table_input.empty()) {
    const ResultTable table = tabulate(table_input);
    std::cout << table.text;
    std::ofstream txt(fs::path(cfg.out_dir) / "table.txt");
    txt << table.text;
    std::ofstream csv(fs::path(cfg.out_dir) / "table.csv");
    csv << table.csv;
    if (!txt || !csv) {
      std::cerr << "failed writing result tables" << std::endl;
      return 1;
    }
  }
  return any_aborted ? 1 : 0;
}

int cmd_bench(const CommonFlags& flags, const std::string& controller_spec, std::int64_t reps) {
  RunConfig cfg = resolve_config(flags);
  validate_config(cfg);
  write_effective_config(cfg, cfg.out_dir);

  PolicyParams policy;
  if (controller_spec.rfind("ckpt:", 0) == 0) {
    policy = load_checkpoint(controller_spec.substr(5)).policy;
  } else {
    Rng rng(mix_seed(cfg.seed, 0xF00D));
    policy = make_policy(rng);
  }

  const BenchReport report =
      bench_compute(policy, cfg.vehicle, cfg.apf, cfg.mpc, reps, std::max<std::int64_t>(reps / 10, 1000));
  std::cout << report.text();
  std::ofstream csv(fs::path(cfg.out_dir) / "bench.csv");
  csv << report.csv();
  return csv ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar vehicle collision-avoidance lab: PPO policy training, "
               "MPC-APF baseline, scenario evaluation and compute benchmarks"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<std::int64_t> total_steps;
  std::string resume;
  std::vector<std::string> controllers;
  std::vector<std::string> scenarios;
  std::string bench_controller = "fresh";
  std::int64_t reps = 10'000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--mode", flags.mode, "heading mode: default|reversed");
    cmd->add_option("--out", flags.out, "output directory");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train a policy with PPO");
  add_common(train_cmd);
  train_cmd->add_option("--total-steps", total_steps, "environment steps to train for");
  train_cmd->add_option("--resume", resume, "checkpoint to resume from");

  CLI::App* eval_cmd = app.add_subcommand("eval", "run intersection scenarios");
  add_common(eval_cmd);
  eval_cmd->add_option("--controller", controllers,
                       "controller spec: mpc-apf | straight | ckpt:<path> (repeatable)");
  eval_cmd->add_option("--scenario", scenarios, "scenario subset: r2l h2h l2r all (repeatable)");

  CLI::App* bench_cmd = app.add_subcommand("bench", "FLOP and latency benchmark");
  add_common(bench_cmd);
  bench_cmd->add_option("--controller", bench_controller,
                        "policy source: fresh | ckpt:<path>");
  bench_cmd->add_option("--reps", reps, "minimum timed policy inferences");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(flags, total_steps, resume);
    if (eval_cmd->parsed()) return cmd_eval(flags, controllers, scenarios);
    if (bench_cmd->parsed()) return cmd_bench(flags, bench_controller, reps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
