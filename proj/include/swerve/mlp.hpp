#pragma once

// Dense MLP with tanh hidden layers and identity output, written directly
// against flat row-major weight buffers. Forward, reverse-mode gradients and
// FLOP accounting all live here; there is no autodiff framework behind it.
//
// Parameters are kept in double for arithmetic but quantized to float32
// after every optimizer write, so checkpoints (which store float32) round-trip
// bit-exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "swerve/rng.hpp"

namespace swerve {

inline double quantize_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

struct MlpParams {
  std::vector<int> dims;                     // e.g. {170, 64, 64, 2}
  std::vector<std::vector<double>> weights;  // per layer, row-major out x in
  std::vector<std::vector<double>> biases;   // per layer, length out

  std::size_t layer_count() const { return weights.size(); }
};

// Uniform init with orthogonal-like gain: hidden layers sqrt(2), output layer
// 0.01, biases zero. Values are float32-quantized from birth.
inline MlpParams make_mlp(const std::vector<int>& dims, Rng& rng, double hidden_gain = std::sqrt(2.0),
                          double output_gain = 0.01) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least one layer");
  MlpParams mlp;
  mlp.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    if (in <= 0 || out <= 0) throw std::invalid_argument("make_mlp: non-positive layer dim");
    const bool last = (l + 2 == dims.size());
    const double gain = last ? output_gain : hidden_gain;
    const double limit = gain * std::sqrt(3.0 / in);
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    for (double& x : w) x = quantize_f32(rng.uniform(-limit, limit));
    mlp.weights.push_back(std::move(w));
    mlp.biases.emplace_back(out, 0.0);
  }
  return mlp;
}

inline void check_mlp_input(const MlpParams& mlp, std::size_t input_size) {
  if (mlp.dims.empty() || static_cast<std::size_t>(mlp.dims.front()) != input_size) {
    throw std::invalid_argument("mlp forward: input dimension mismatch");
  }
}

// Per-sample activations kept for the backward pass. post[0] is the input;
// post[l+1] the output of layer l after its activation.
struct MlpCache {
  std::vector<std::vector<double>> post;
};

namespace detail {

// Dense row-major matvec with eight independent accumulators. Strict IEEE
// builds cannot vectorize a single reduction chain; splitting it fixes the
// summation order explicitly and breaks the add-latency chain. Order: bias +
// pairwise partial tree + remainder, identical on every call.
inline void dense_forward(const double* __restrict w, const double* __restrict b,
                          const double* __restrict x, double* __restrict y, int in, int out) {
  for (int o = 0; o < out; ++o) {
    const double* __restrict row = w + static_cast<std::size_t>(o) * in;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double a4 = 0.0, a5 = 0.0, a6 = 0.0, a7 = 0.0;
    int k = 0;
    for (; k + 8 <= in; k += 8) {
      a0 += row[k] * x[k];
      a1 += row[k + 1] * x[k + 1];
      a2 += row[k + 2] * x[k + 2];
      a3 += row[k + 3] * x[k + 3];
      a4 += row[k + 4] * x[k + 4];
      a5 += row[k + 5] * x[k + 5];
      a6 += row[k + 6] * x[k + 6];
      a7 += row[k + 7] * x[k + 7];
    }
    double acc = b[o] + (((a0 + a1) + (a2 + a3)) + ((a4 + a5) + (a6 + a7)));
    for (; k < in; ++k) acc += row[k] * x[k];
    y[o] = acc;
  }
}

}  // namespace detail

inline void forward(const MlpParams& mlp, const double* input, std::size_t input_size,
                    std::vector<double>& output, MlpCache* cache = nullptr) {
  check_mlp_input(mlp, input_size);
  const std::size_t n_layers = mlp.layer_count();

  thread_local std::vector<double> buf_a, buf_b;
  buf_a.assign(input, input + input_size);
  if (cache) {
    cache->post.resize(n_layers + 1);
    cache->post[0] = buf_a;
  }
  std::vector<double>* cur = &buf_a;
  std::vector<double>* next = &buf_b;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = mlp.dims[l], out = mlp.dims[l + 1];
    next->resize(static_cast<std::size_t>(out));
    detail::dense_forward(mlp.weights[l].data(), mlp.biases[l].data(), cur->data(), next->data(),
                          in, out);
    if (l + 1 < n_layers) {
      for (double& x : *next) x = std::tanh(x);
    }
    std::swap(cur, next);
    if (cache) cache->post[l + 1] = *cur;
  }
  output = *cur;
}

inline std::vector<double> forward(const MlpParams& mlp, const std::vector<double>& input) {
  std::vector<double> out;
  forward(mlp, input.data(), input.size(), out);
  return out;
}

struct MlpGrads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  explicit MlpGrads(const MlpParams& mlp) {
    for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
      weights.emplace_back(mlp.weights[l].size(), 0.0);
      biases.emplace_back(mlp.biases[l].size(), 0.0);
    }
  }

  void zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
  }

  void scale(double s) {
    for (auto& w : weights)
      for (double& x : w) x *= s;
    for (auto& b : biases)
      for (double& x : b) x *= s;
  }
};

// Accumulates dL/dW, dL/db given dL/d(output); tanh derivative uses the cached
// post-activation values (1 - a^2).
inline void backward(const MlpParams& mlp, const MlpCache& cache,
                     const std::vector<double>& grad_output, MlpGrads& grads) {
  const std::size_t n_layers = mlp.layer_count();
  if (grad_output.size() != static_cast<std::size_t>(mlp.dims.back())) {
    throw std::invalid_argument("mlp backward: output gradient dimension mismatch");
  }
  std::vector<double> delta = grad_output;  // dL/d(pre-activation of current layer)
  for (std::size_t li = n_layers; li-- > 0;) {
    const int in = mlp.dims[li], out = mlp.dims[li + 1];
    if (li + 1 < n_layers) {
      // convert dL/d(post) -> dL/d(pre) through tanh
      const std::vector<double>& a = cache.post[li + 1];
      for (int o = 0; o < out; ++o) delta[o] *= 1.0 - a[o] * a[o];
    }
    const std::vector<double>& x = cache.post[li];
    double* gw = grads.weights[li].data();
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      grads.biases[li][o] += d;
      double* row = gw + static_cast<std::size_t>(o) * in;
      for (int k = 0; k < in; ++k) row[k] += d * x[k];
    }
    if (li > 0) {
      std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
      const double* w = mlp.weights[li].data();
      for (int o = 0; o < out; ++o) {
        const double d = delta[o];
        const double* row = w + static_cast<std::size_t>(o) * in;
        for (int k = 0; k < in; ++k) prev[k] += d * row[k];
      }
      delta = std::move(prev);
    }
  }
}

// FLOP count of one deterministic forward pass: 2*in*out multiply-adds plus
// `out` bias adds per dense layer, plus one FLOP per hidden tanh element.
// The output layer has no activation cost.
inline std::int64_t count_flops(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("count_flops: need at least one layer");
  std::int64_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::int64_t in = dims[l], out = dims[l + 1];
    total += 2 * in * out + out;
    if (l + 2 < dims.size()) total += out;  // hidden tanh
  }
  return total;
}

inline std::int64_t count_flops(const MlpParams& mlp) { return count_flops(mlp.dims); }

}  // namespace swerve
