#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "wforget/errors.hpp"
#include "wforget/mlp.hpp"
#include "wforget/rng.hpp"
#include "wforget/tape.hpp"
#include "wforget/tensor.hpp"

using namespace wforget;

TEST_CASE("zero weights give zero logits") {
  Mlp mlp({4, {8}, 3, Activation::kRelu});
  ParamVector theta(mlp.num_params(), 0.0);
  Tensor x = Tensor::matrix(2, 4);
  x.data = {1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 1.0, -1.0};
  Tensor out = mlp.logits(theta, x);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("single linear layer reproduces its weight rows") {
  Mlp mlp({3, {}, 2, Activation::kRelu});
  // w0 is [3 x 2] row-major, b0 is [2].
  ParamVector theta = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.25, -0.5};
  Tensor x = Tensor::matrix(1, 3);
  x.data = {1.0, 0.0, 0.0};
  Tensor out = mlp.logits(theta, x);
  CHECK(out.at(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(out.at(0, 1) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("seeded 2-4-3 forward matches a hand-rolled scalar pass") {
  MlpSpec spec{2, {4}, 3, Activation::kTanh};
  Mlp mlp(spec);
  ParamVector theta = mlp.init_params(7);
  Tensor x = Tensor::matrix(2, 2);
  x.data = {0.3, -1.2, 2.0, 0.7};

  // Independent scalar recomputation of the same affine/activation chain.
  auto expect = [&](size_t s, size_t cls) {
    double h[4];
    for (size_t j = 0; j < 4; ++j) {
      double z = theta[0 * 4 + j] * x.at(s, 0) + theta[1 * 4 + j] * x.at(s, 1) + theta[8 + j];
      h[j] = std::tanh(z);
    }
    double out = 0.0;
    for (size_t j = 0; j < 4; ++j) out += h[j] * theta[12 + j * 3 + cls];
    return out + theta[24 + cls];
  };

  Tensor out = mlp.logits(theta, x);
  for (size_t s = 0; s < 2; ++s) {
    for (size_t c = 0; c < 3; ++c) {
      CHECK(out.at(s, c) == doctest::Approx(expect(s, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform logits cost log n") {
  Tensor logits = Tensor::matrix(3, 5);
  for (double& v : logits.data) v = 0.7;
  std::vector<double> ce = ad::per_sample_cross_entropy(logits, {0, 2, 4});
  for (double v : ce) CHECK(v == doctest::Approx(std::log(5.0)).epsilon(1e-14));
}

TEST_CASE("huge correct margin drives the loss to zero") {
  Tensor logits = Tensor::matrix(1, 3);
  logits.data = {60.0, 0.0, -5.0};
  std::vector<double> ce = ad::per_sample_cross_entropy(logits, {0});
  CHECK(ce[0] >= 0.0);
  CHECK(ce[0] <= 1e-8);
}

TEST_CASE("two-logit example value is frozen") {
  Tensor logits = Tensor::matrix(1, 2);
  logits.data = {1.0, 0.0};
  std::vector<double> ce = ad::per_sample_cross_entropy(logits, {0});
  CHECK(std::fabs(ce[0] - 0.31326168751822286) < 1e-12);
}

TEST_CASE("cross entropy rejects bad labels and shapes") {
  Tensor logits = Tensor::matrix(2, 3);
  CHECK_THROWS_AS(ad::per_sample_cross_entropy(logits, {0, 3}), DomainError);
  CHECK_THROWS_AS(ad::per_sample_cross_entropy(logits, {-1, 0}), DomainError);
  CHECK_THROWS_AS(ad::per_sample_cross_entropy(logits, {0}), ShapeError);

  Mlp mlp({4, {8}, 3, Activation::kRelu});
  ParamVector theta(mlp.num_params(), 0.0);
  Tensor bad = Tensor::matrix(2, 5);
  CHECK_THROWS_AS(mlp.logits(theta, bad), ShapeError);
  ParamVector short_theta(3, 0.0);
  Tensor ok = Tensor::matrix(1, 4);
  CHECK_THROWS_AS(mlp.logits(short_theta, ok), ShapeError);
}

TEST_CASE("clip keeps values below the cap and kills gradients above it") {
  ad::Tape tape;
  Tensor v = Tensor::vec(3);
  v.data = {12.0, 3.0, 10.0};
  ad::NodeId a = tape.param(v);
  ad::NodeId clipped = tape.clip_max(a, 10.0);
  CHECK(tape.value(clipped).data[0] == 10.0);
  CHECK(tape.value(clipped).data[1] == 3.0);
  CHECK(tape.value(clipped).data[2] == 10.0);
  ad::NodeId loss = tape.mean(clipped);
  tape.backward(loss);
  const Tensor& g = tape.grad(a);
  CHECK(g.data[0] == 0.0);                               // above the cap
  CHECK(g.data[1] == doctest::Approx(1.0 / 3.0));        // below
  CHECK(g.data[2] == doctest::Approx(1.0 / 3.0));        // exactly at the cap: passes through
}

TEST_CASE("backward of sum of squares is 2 theta") {
  ad::Tape tape;
  Tensor v = Tensor::vec(4);
  v.data = {1.0, -2.0, 0.0, 3.5};
  ad::NodeId a = tape.param(v);
  tape.backward(tape.sum_squares(a));
  const Tensor& g = tape.grad(a);
  for (size_t i = 0; i < 4; ++i) CHECK(g.data[i] == doctest::Approx(2.0 * v.data[i]).epsilon(1e-15));
}

TEST_CASE("a loss that ignores the parameters has zero gradient") {
  ad::Tape tape;
  Tensor v = Tensor::vec(3);
  v.data = {1.0, 2.0, 3.0};
  ad::NodeId a = tape.param(v);
  ad::NodeId c = tape.constant(4.2);
  tape.backward(tape.square(c));
  const Tensor& g = tape.grad(a);
  for (double x : g.data) CHECK(x == 0.0);
}

TEST_CASE("flatten and unflatten are exact inverses") {
  Rng rng(99);
  for (int round = 0; round < 20; ++round) {
    MlpSpec spec;
    spec.input_dim = 1 + rng.uniform_index(6);
    const size_t layers = rng.uniform_index(3);
    for (size_t l = 0; l < layers; ++l) spec.hidden.push_back(1 + rng.uniform_index(7));
    spec.num_classes = 2 + rng.uniform_index(4);
    Mlp mlp(spec);
    ParamVector theta(mlp.num_params());
    for (double& x : theta) x = rng.normal();
    ParamVector back = flatten(mlp.layout(), unflatten(mlp.layout(), theta));
    REQUIRE(back.size() == theta.size());
    CHECK(std::memcmp(back.data(), theta.data(), theta.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("seeded init is bit-identical and seed-sensitive") {
  Mlp mlp({20, {64}, 5, Activation::kRelu});
  ParamVector a = mlp.init_params(1234);
  ParamVector b = mlp.init_params(1234);
  ParamVector c = mlp.init_params(1235);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) any_diff = any_diff || a[i] != c[i];
  CHECK(any_diff);
  const double limit = std::sqrt(6.0 / (20.0 + 64.0));
  for (size_t i = 0; i < 20 * 64; ++i) {
    CHECK(std::fabs(a[i]) <= limit);
  }
}

TEST_CASE("repeated forward and backward are bit-identical") {
  Mlp mlp({6, {10}, 4, Activation::kRelu});
  ParamVector theta = mlp.init_params(5);
  Tensor x = Tensor::matrix(3, 6);
  Rng rng(17);
  for (double& v : x.data) v = rng.normal();
  std::vector<int> labels = {1, 0, 3};

  auto run = [&]() {
    ad::Tape tape;
    std::vector<ad::NodeId> params;
    ad::NodeId logits = mlp.forward(tape, theta, x, &params);
    ad::NodeId loss = tape.mean(tape.softmax_xent(logits, labels));
    tape.backward(loss);
    return std::make_pair(tape.value(loss).scalar_value(), mlp.collect_grad(tape, params));
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  CHECK(std::memcmp(&l1, &l2, sizeof(double)) == 0);
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
}
