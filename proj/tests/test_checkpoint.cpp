#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "swerve/adam.hpp"
#include "swerve/checkpoint.hpp"
#include "swerve/policy.hpp"
#include "swerve/rng.hpp"

using namespace swerve;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("round-trip is bit-exact, with and without optimizer state") {
  Rng rng(101);
  PolicyParams p = make_policy(rng);
  p.log_std = {quantize_f32(0.123), quantize_f32(-0.456)};

  TempFile f("swerve_ckpt_roundtrip.bin");
  save_checkpoint(f.path, p);
  const LoadedCheckpoint loaded = load_checkpoint(f.path);
  CHECK_FALSE(loaded.trainer.has_value());
  for (std::size_t l = 0; l < p.actor.layer_count(); ++l) {
    REQUIRE(loaded.policy.actor.weights[l] == p.actor.weights[l]);
    REQUIRE(loaded.policy.actor.biases[l] == p.actor.biases[l]);
  }
  for (std::size_t l = 0; l < p.critic.layer_count(); ++l) {
    REQUIRE(loaded.policy.critic.weights[l] == p.critic.weights[l]);
  }
  CHECK(loaded.policy.log_std == p.log_std);

  // with optimizer state, after real updates so the moments are nonzero
  TrainerState ts = TrainerState::zeros_like(p);
  PolicyGrads g(p);
  for (auto& w : g.actor.weights)
    for (double& x : w) x = 0.01;
  adam_step(p, g, ts, {});
  ts.global_step = 123456789ULL;
  save_checkpoint(f.path, p, &ts);
  const LoadedCheckpoint full = load_checkpoint(f.path);
  REQUIRE(full.trainer.has_value());
  CHECK(full.trainer->adam_step == ts.adam_step);
  CHECK(full.trainer->global_step == ts.global_step);
  for (std::size_t l = 0; l < p.actor.layer_count(); ++l) {
    REQUIRE(full.trainer->actor_m_w[l] == ts.actor_m_w[l]);
    REQUIRE(full.trainer->actor_v_w[l] == ts.actor_v_w[l]);
    REQUIRE(full.policy.actor.weights[l] == p.actor.weights[l]);
  }

  // saving the loaded copy reproduces the same bytes
  TempFile f2("swerve_ckpt_roundtrip2.bin");
  save_checkpoint(f2.path, full.policy, &*full.trainer);
  CHECK(read_all(f.path) == read_all(f2.path));
}

TEST_CASE("truncated file raises a corrupt-checkpoint error") {
  Rng rng(5);
  PolicyParams p = make_policy(rng);
  TempFile f("swerve_ckpt_trunc.bin");
  save_checkpoint(f.path, p);
  std::vector<char> bytes = read_all(f.path);
  bytes.resize(bytes.size() / 2);
  write_all(f.path, bytes);
  CHECK_THROWS_AS(load_checkpoint(f.path), CheckpointError);

  bytes.resize(3);  // even the magic is incomplete
  write_all(f.path, bytes);
  CHECK_THROWS_AS(load_checkpoint(f.path), CheckpointError);
}

TEST_CASE("bad magic is reported as such") {
  Rng rng(5);
  PolicyParams p = make_policy(rng);
  TempFile f("swerve_ckpt_magic.bin");
  save_checkpoint(f.path, p);
  std::vector<char> bytes = read_all(f.path);
  bytes[0] = 'X';
  write_all(f.path, bytes);
  CHECK_THROWS_WITH(load_checkpoint(f.path), Catch::Matchers::ContainsSubstring("bad magic"));
}

TEST_CASE("version bump raises an explicit unsupported-version error") {
  Rng rng(5);
  PolicyParams p = make_policy(rng);
  TempFile f("swerve_ckpt_version.bin");
  save_checkpoint(f.path, p);
  std::vector<char> bytes = read_all(f.path);
  bytes[4] = 2;  // version field follows the 4-byte magic
  write_all(f.path, bytes);
  CHECK_THROWS_WITH(load_checkpoint(f.path),
                    Catch::Matchers::ContainsSubstring("unsupported version 2"));
}

TEST_CASE("payload corruption is caught by the checksum") {
  Rng rng(5);
  PolicyParams p = make_policy(rng);
  TempFile f("swerve_ckpt_crc.bin");
  save_checkpoint(f.path, p);
  std::vector<char> bytes = read_all(f.path);
  bytes[bytes.size() / 2] ^= 0x40;  // flip a bit mid-payload
  write_all(f.path, bytes);
  CHECK_THROWS_WITH(load_checkpoint(f.path), Catch::Matchers::ContainsSubstring("CRC"));
}

TEST_CASE("deterministic error on repeated loads") {
  Rng rng(5);
  PolicyParams p = make_policy(rng);
  TempFile f("swerve_ckpt_det.bin");
  save_checkpoint(f.path, p);
  std::vector<char> bytes = read_all(f.path);
  bytes[20] ^= 0x01;
  write_all(f.path, bytes);
  std::string first, second;
  try {
    load_checkpoint(f.path);
  } catch (const CheckpointError& e) {
    first = e.what();
  }
  try {
    load_checkpoint(f.path);
  } catch (const CheckpointError& e) {
    second = e.what();
  }
  REQUIRE_FALSE(first.empty());
  CHECK(first == second);
}
