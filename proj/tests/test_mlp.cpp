#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "swerve/mlp.hpp"
#include "swerve/rng.hpp"

using namespace swerve;

TEST_CASE("zero parameters map every input to zero") {
  MlpParams mlp;
  mlp.dims = {5, 4, 4, 2};
  for (std::size_t l = 0; l + 1 < mlp.dims.size(); ++l) {
    mlp.weights.emplace_back(static_cast<std::size_t>(mlp.dims[l]) * mlp.dims[l + 1], 0.0);
    mlp.biases.emplace_back(mlp.dims[l + 1], 0.0);
  }
  const std::vector<double> out = forward(mlp, {1.0, -2.0, 3.0, 0.5, 0.1});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("unit 1x1x1x1 chain evaluates tanh(tanh(x))") {
  MlpParams mlp;
  mlp.dims = {1, 1, 1, 1};
  for (int l = 0; l < 3; ++l) {
    mlp.weights.push_back({1.0});
    mlp.biases.push_back({0.0});
  }
  const std::vector<double> out = forward(mlp, {0.5});
  CHECK(out[0] == Catch::Approx(std::tanh(std::tanh(0.5))).margin(1e-12));
  CHECK(out[0] == Catch::Approx(0.431808).margin(1e-5));
}

TEST_CASE("hidden activations stay inside (-1, 1)") {
  Rng rng(3);
  const MlpParams mlp = make_mlp({8, 16, 16, 2}, rng);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> input(8);
    for (double& x : input) x = rng.uniform(-5.0, 5.0);
    MlpCache cache;
    std::vector<double> out;
    forward(mlp, input.data(), input.size(), out, &cache);
    for (std::size_t l = 1; l + 1 < cache.post.size(); ++l) {
      for (double a : cache.post[l]) {
        REQUIRE(a > -1.0);
        REQUIRE(a < 1.0);
      }
    }
  }
}

TEST_CASE("FLOP accounting convention") {
  CHECK(count_flops({170, 64, 64, 2}) == 30466);
  CHECK(count_flops({1, 1}) == 3);
  CHECK(count_flops({170, 64, 64, 1}) == 30337);
}

TEST_CASE("dimension mismatch is a structural error") {
  Rng rng(3);
  const MlpParams mlp = make_mlp({8, 4, 2}, rng);
  std::vector<double> bad(7, 0.0);
  std::vector<double> out;
  CHECK_THROWS_AS(forward(mlp, bad.data(), bad.size(), out), std::invalid_argument);
}

TEST_CASE("backward matches central finite differences on a scalar loss") {
  // loss = sum of outputs; gradient check over every weight and bias
  Rng rng(17);
  MlpParams mlp = make_mlp({6, 5, 4, 3}, rng, 1.2, 0.8);
  std::vector<double> input(6);
  for (double& x : input) x = rng.uniform(-1.0, 1.0);

  auto loss = [&](const MlpParams& m) {
    std::vector<double> out;
    forward(m, input.data(), input.size(), out);
    double sum = 0.0;
    for (double v : out) sum += v;
    return sum;
  };

  MlpCache cache;
  std::vector<double> out;
  forward(mlp, input.data(), input.size(), out, &cache);
  MlpGrads grads(mlp);
  backward(mlp, cache, std::vector<double>(out.size(), 1.0), grads);

  const double h = 1e-6;
  for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
    for (std::size_t i = 0; i < mlp.weights[l].size(); ++i) {
      MlpParams plus = mlp, minus = mlp;
      plus.weights[l][i] += h;
      minus.weights[l][i] -= h;
      const double fd = (loss(plus) - loss(minus)) / (2.0 * h);
      REQUIRE(grads.weights[l][i] == Catch::Approx(fd).margin(1e-6));
    }
    for (std::size_t i = 0; i < mlp.biases[l].size(); ++i) {
      MlpParams plus = mlp, minus = mlp;
      plus.biases[l][i] += h;
      minus.biases[l][i] -= h;
      const double fd = (loss(plus) - loss(minus)) / (2.0 * h);
      REQUIRE(grads.biases[l][i] == Catch::Approx(fd).margin(1e-6));
    }
  }
}

TEST_CASE("per-layer Lipschitz bound on output differences") {
  // |f(x) - f(y)| <= |W3| |W2| |W1| |x - y| with tanh 1-Lipschitz; the bound
  // uses Frobenius norms so it is loose, never violated.
  Rng rng(23);
  const MlpParams mlp = make_mlp({10, 8, 8, 2}, rng);
  auto frob = [](const std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += x * x;
    return std::sqrt(s);
  };
  const double bound_coef = frob(mlp.weights[0]) * frob(mlp.weights[1]) * frob(mlp.weights[2]);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(10), y(10);
    for (int i = 0; i < 10; ++i) {
      x[i] = rng.uniform(-2, 2);
      y[i] = rng.uniform(-2, 2);
    }
    const std::vector<double> fx = forward(mlp, x);
    const std::vector<double> fy = forward(mlp, y);
    double dist_out = 0.0, dist_in = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) dist_out += (fx[i] - fy[i]) * (fx[i] - fy[i]);
    for (std::size_t i = 0; i < x.size(); ++i) dist_in += (x[i] - y[i]) * (x[i] - y[i]);
    REQUIRE(std::sqrt(dist_out) <= bound_coef * std::sqrt(dist_in) + 1e-12);
  }
}

TEST_CASE("initialization is float32-exact") {
  Rng rng(29);
  const MlpParams mlp = make_mlp({170, 64, 64, 2}, rng);
  for (const auto& w : mlp.weights) {
    for (double x : w) REQUIRE(x == quantize_f32(x));
  }
}
