#pragma once

// Checkpoint file format (all multi-byte fields little-endian):
//
//   bytes 0..3   magic "KEVD"
//   u32          format version (= 1)
//   u8           network count (= 2: actor, critic)
//   per network:
//     u8         dim count
//     u32 * n    layer dims
//     per layer: f32 weights (row-major out x in), then f32 biases
//   f32 * 2      log_std
//   u8           optimizer-state presence flag
//   if present:
//     u64        adam step counter
//     u64        global env-step counter
//     per network, per layer: f32 m_w, v_w, m_b, v_b (same shapes as params)
//     f32 * 2    m_log_std, then f32 * 2 v_log_std
//   u32          CRC32 (IEEE) of every preceding byte
//
// Round-trips are bit-exact because parameters are float32-quantized in
// memory (see mlp.hpp). Corruption, truncation and version mismatches are
// reported with the offending field named.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swerve/policy.hpp"

namespace swerve {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 4> kCheckpointMagic = {'K', 'E', 'V', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Adam first/second moments for every trainable tensor, plus step counters.
struct TrainerState {
  std::vector<std::vector<double>> actor_m_w, actor_v_w, actor_m_b, actor_v_b;
  std::vector<std::vector<double>> critic_m_w, critic_v_w, critic_m_b, critic_v_b;
  std::array<double, kActionDim> log_std_m{}, log_std_v{};
  std::uint64_t adam_step = 0;
  std::uint64_t global_step = 0;

  static TrainerState zeros_like(const PolicyParams& p) {
    TrainerState s;
    auto shape = [](const MlpParams& mlp, std::vector<std::vector<double>>& mw,
                    std::vector<std::vector<double>>& vw, std::vector<std::vector<double>>& mb,
                    std::vector<std::vector<double>>& vb) {
      for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
        mw.emplace_back(mlp.weights[l].size(), 0.0);
        vw.emplace_back(mlp.weights[l].size(), 0.0);
        mb.emplace_back(mlp.biases[l].size(), 0.0);
        vb.emplace_back(mlp.biases[l].size(), 0.0);
      }
    };
    shape(p.actor, s.actor_m_w, s.actor_v_w, s.actor_m_b, s.actor_v_b);
    shape(p.critic, s.critic_m_w, s.critic_v_w, s.critic_m_b, s.critic_v_b);
    return s;
  }
};

namespace detail {

inline std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    u32(bits);
  }
  void f32_span(const std::vector<double>& v) {
    for (double x : v) f32(x);
  }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {}

  std::uint8_t u8(const char* field) {
    need(1, field);
    return data_[pos_++];
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  double f32(const char* field) {
    const std::uint32_t bits = u32(field);
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
  }
  void f32_span(std::vector<double>& out, std::size_t n, const char* field) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f32(field);
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return len_ - pos_; }

 private:
  void need(std::size_t n, const char* field) {
    if (pos_ + n > len_) {
      throw CheckpointError(std::string("checkpoint: truncated file (") + field + ")");
    }
  }
  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

inline void write_mlp(ByteWriter& w, const MlpParams& mlp) {
  w.u8(static_cast<std::uint8_t>(mlp.dims.size()));
  for (int d : mlp.dims) w.u32(static_cast<std::uint32_t>(d));
  for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
    w.f32_span(mlp.weights[l]);
    w.f32_span(mlp.biases[l]);
  }
}

inline MlpParams read_mlp(ByteReader& r, const char* which) {
  MlpParams mlp;
  const int n_dims = r.u8(which);
  if (n_dims < 2) throw CheckpointError(std::string("checkpoint: bad dim count for ") + which);
  for (int i = 0; i < n_dims; ++i) {
    const std::uint32_t d = r.u32(which);
    if (d == 0 || d > 1'000'000) {
      throw CheckpointError(std::string("checkpoint: implausible layer dim in ") + which);
    }
    mlp.dims.push_back(static_cast<int>(d));
  }
  for (std::size_t l = 0; l + 1 < mlp.dims.size(); ++l) {
    const std::size_t in = static_cast<std::size_t>(mlp.dims[l]);
    const std::size_t out = static_cast<std::size_t>(mlp.dims[l + 1]);
    std::vector<double> wts, bs;
    r.f32_span(wts, in * out, which);
    r.f32_span(bs, out, which);
    mlp.weights.push_back(std::move(wts));
    mlp.biases.push_back(std::move(bs));
  }
  return mlp;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const PolicyParams& p,
                            const TrainerState* opt = nullptr) {
  detail::ByteWriter w;
  for (char c : kCheckpointMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.u8(2);
  detail::write_mlp(w, p.actor);
  detail::write_mlp(w, p.critic);
  for (double ls : p.log_std) w.f32(ls);
  w.u8(opt ? 1 : 0);
  if (opt) {
    w.u64(opt->adam_step);
    w.u64(opt->global_step);
    auto moments = [&](const std::vector<std::vector<double>>& mw,
                       const std::vector<std::vector<double>>& vw,
                       const std::vector<std::vector<double>>& mb,
                       const std::vector<std::vector<double>>& vb) {
      for (std::size_t l = 0; l < mw.size(); ++l) {
        w.f32_span(mw[l]);
        w.f32_span(vw[l]);
        w.f32_span(mb[l]);
        w.f32_span(vb[l]);
      }
    };
    moments(opt->actor_m_w, opt->actor_v_w, opt->actor_m_b, opt->actor_v_b);
    moments(opt->critic_m_w, opt->critic_v_w, opt->critic_m_b, opt->critic_v_b);
    for (double x : opt->log_std_m) w.f32(x);
    for (double x : opt->log_std_v) w.f32(x);
  }
  const std::uint32_t crc = detail::crc32_ieee(w.bytes().data(), w.bytes().size());
  w.u32(crc);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw CheckpointError("checkpoint: write failed for '" + path + "'");
}

struct LoadedCheckpoint {
  PolicyParams policy;
  std::optional<TrainerState> trainer;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 4) throw CheckpointError("checkpoint: truncated file (crc)");
  const std::size_t payload_len = bytes.size() - 4;
  detail::ByteReader r(bytes.data(), payload_len);

  for (char c : kCheckpointMagic) {
    if (r.u8("magic") != static_cast<std::uint8_t>(c)) {
      throw CheckpointError("checkpoint: bad magic");
    }
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }

  // CRC is verified before any payload parsing so corruption is reported as
  // corruption, not as some downstream structural error.
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) {
    stored_crc |= static_cast<std::uint32_t>(bytes[payload_len + i]) << (8 * i);
  }
  const std::uint32_t actual_crc = detail::crc32_ieee(bytes.data(), payload_len);
  if (stored_crc != actual_crc) throw CheckpointError("checkpoint: CRC mismatch");

  const int n_networks = r.u8("network count");
  if (n_networks != 2) {
    throw CheckpointError("checkpoint: unexpected network count " + std::to_string(n_networks));
  }
  LoadedCheckpoint out;
  out.policy.actor = detail::read_mlp(r, "actor");
  out.policy.critic = detail::read_mlp(r, "critic");
  if (out.policy.actor.dims.back() != kActionDim) {
    throw CheckpointError("checkpoint: actor output dim mismatch");
  }
  if (out.policy.critic.dims.back() != 1) {
    throw CheckpointError("checkpoint: critic output dim mismatch");
  }
  for (int d = 0; d < kActionDim; ++d) out.policy.log_std[d] = r.f32("log_std");

  const int has_opt = r.u8("optimizer flag");
  if (has_opt == 1) {
    TrainerState s = TrainerState::zeros_like(out.policy);
    s.adam_step = r.u64("adam step");
    s.global_step = r.u64("global step");
    auto moments = [&](const MlpParams& mlp, std::vector<std::vector<double>>& mw,
                       std::vector<std::vector<double>>& vw, std::vector<std::vector<double>>& mb,
                       std::vector<std::vector<double>>& vb, const char* which) {
      for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
        r.f32_span(mw[l], mlp.weights[l].size(), which);
        r.f32_span(vw[l], mlp.weights[l].size(), which);
        r.f32_span(mb[l], mlp.biases[l].size(), which);
        r.f32_span(vb[l], mlp.biases[l].size(), which);
      }
    };
    moments(out.policy.actor, s.actor_m_w, s.actor_v_w, s.actor_m_b, s.actor_v_b, "actor moments");
    moments(out.policy.critic, s.critic_m_w, s.critic_v_w, s.critic_m_b, s.critic_v_b,
            "critic moments");
    for (int d = 0; d < kActionDim; ++d) s.log_std_m[d] = r.f32("log_std moments");
    for (int d = 0; d < kActionDim; ++d) s.log_std_v[d] = r.f32("log_std moments");
    out.trainer = std::move(s);
  } else if (has_opt != 0) {
    throw CheckpointError("checkpoint: bad optimizer flag");
  }
  if (r.remaining() != 0) throw CheckpointError("checkpoint: trailing bytes");
  return out;
}

}  // namespace swerve
