#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "swerve/config.hpp"

using namespace swerve;

TEST_CASE("defaults validate cleanly") {
  RunConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("validation reports every problem, not just the first") {
  RunConfig cfg;
  cfg.vehicle.wheelbase = -1.0;
  cfg.vehicle.mass = 0.0;
  cfg.scenario.trials = 0;
  cfg.scene = "no_such_scene_file.scene";
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("wheelbase") != std::string::npos);
    CHECK(msg.find("mass") != std::string::npos);
    CHECK(msg.find("trials") != std::string::npos);
    CHECK(msg.find("no_such_scene_file.scene") != std::string::npos);  // names the path
    CHECK(msg.find("4 problem(s)") != std::string::npos);
  }
}

TEST_CASE("JSON round-trip through parse and emit") {
  RunConfig cfg;
  cfg.seed = 123;
  cfg.mode = HeadingMode::Reversed;
  cfg.ppo.total_steps = 4096;
  cfg.env.spawn.n_obstacles = 4;
  cfg.vehicle.max_speed = 4.5;
  const nlohmann::json j = config_to_json(cfg);
  const RunConfig back = parse_config(j);
  CHECK(back.seed == 123);
  CHECK(back.mode == HeadingMode::Reversed);
  CHECK(back.ppo.total_steps == 4096);
  CHECK(back.env.spawn.n_obstacles == 4);
  CHECK(back.vehicle.max_speed == 4.5);
  CHECK(back.env.vehicle.max_speed == 4.5);  // env inherits the vehicle params
}

TEST_CASE("partial configs override only what they mention") {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "seed": 9,
    "ppo": {"rollout": 512, "minibatch": 32},
    "mpc": {"q_obs": 3.5}
  })");
  const RunConfig cfg = parse_config(j);
  CHECK(cfg.seed == 9);
  CHECK(cfg.ppo.rollout == 512);
  CHECK(cfg.ppo.minibatch == 32);
  CHECK(cfg.ppo.gamma == 0.99);  // untouched default
  CHECK(cfg.apf.q_obs == 3.5);
  CHECK(cfg.scene == "racetrack");
}

TEST_CASE("bad mode and malformed JSON raise config errors") {
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"mode": "sideways"})")), ConfigError);
  namespace fs = std::filesystem;
  const fs::path bad = fs::temp_directory_path() / "swerve_bad_config.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(load_config(bad.string()), ConfigError);
  fs::remove(bad);
  CHECK_THROWS_WITH(load_config("missing_config.json"),
                    Catch::Matchers::ContainsSubstring("missing_config.json"));
}

TEST_CASE("effective config is echoed into the output directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "swerve_cfg_echo";
  fs::remove_all(dir);
  RunConfig cfg;
  cfg.seed = 31;
  write_effective_config(cfg, dir.string());
  std::ifstream in(dir / "effective_config.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j.at("seed").get<std::uint64_t>() == 31);
  CHECK(j.contains("ppo"));
  CHECK(j.contains("vehicle"));
  fs::remove_all(dir);
}

TEST_CASE("ppo config invariants") {
  PpoConfig ppo;
  ppo.minibatch = 60;  // does not divide 2048
  CHECK_THROWS_AS(ppo.validate(), std::invalid_argument);
  ppo.minibatch = 64;
  ppo.gamma = 1.5;
  CHECK_THROWS_AS(ppo.validate(), std::invalid_argument);
  ppo.gamma = 0.99;
  ppo.workers = 3;  // does not divide 2048
  CHECK_THROWS_AS(ppo.validate(), std::invalid_argument);
  ppo.workers = 4;
  CHECK_NOTHROW(ppo.validate());
}
