// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "ridnet/ops.hpp"
#include "test_support.hpp"

using namespace ridnet;
using testing::random_tensor;
using testing::thrown_code;

TEST_CASE("gradient of sum(w*x) with respect to w is x", "[autograd]") {
  std::mt19937_64 rng(1);
  auto x = random_tensor<double>({2, 3, 4, 4}, rng);
  auto w = random_tensor<double>({2, 3, 4, 4}, rng, -1, 1, true);
  sum(mul(w, x)).backward();
  REQUIRE(testing::bit_equal(w.grad(), x.data()));
  REQUIRE_FALSE(x.has_grad());
}

TEST_CASE("a leaf off every path to the loss gets a zero gradient", "[autograd]") {
  std::mt19937_64 rng(2);
  auto a = random_tensor<float>({1, 2, 3, 3}, rng, -1, 1, true);
  auto unused = random_tensor<float>({1, 2, 3, 3}, rng, -1, 1, true);
  auto side = add(unused, unused);  // part of no path to the loss
  sum(relu(a)).backward();
  // Never allocated counts as zero; an allocated buffer must hold zeros.
  for (float g : unused.grad()) REQUIRE(g == 0.0f);
  unused.zero_grad();
  sum(relu(a)).backward();
  REQUIRE(unused.has_grad());
  for (float g : unused.grad()) REQUIRE(g == 0.0f);
  (void)side;
}

TEST_CASE("backward rejects non-scalar losses and a second call", "[autograd]") {
  std::mt19937_64 rng(3);
  auto a = random_tensor<float>({4}, rng, -1, 1, true);
  REQUIRE(thrown_code([&] { relu(a).backward(); }) == Errc::graph_state);
  auto loss = sum(mul(a, a));
  loss.backward();
  REQUIRE(thrown_code([&] { loss.backward(); }) == Errc::graph_state);
}

TEST_CASE("retain_graph allows a second backward that accumulates", "[autograd]") {
  Tensor<double> a({3}, {1.0, -2.0, 3.0}, true);
  auto loss = sum(mul(a, a));
  loss.backward(true);
  loss.backward();
  for (std::size_t i = 0; i < 3; ++i) REQUIRE(a.grad()[i] == 4.0 * a.data()[i]);
}

TEST_CASE("backward of a sum of losses is the sum of separate backwards", "[autograd]") {
  std::mt19937_64 rng(4);
  auto x = random_tensor<double>({1, 2, 6, 6}, rng);
  auto w = random_tensor<double>({2, 2, 3, 3}, rng, -1, 1, true);
  auto b = random_tensor<double>({2}, rng, -1, 1, true);
  auto t1 = random_tensor<double>({1, 2, 6, 6}, rng);
  auto loss1 = [&] { return l1_loss(conv2d(x, w, b, 1, 1), t1); };
  auto loss2 = [&] { return sum(sigmoid(conv2d(x, w, b, 2, 2))); };

  add(loss1(), loss2()).backward();
  std::vector<double> joint_w(w.grad().begin(), w.grad().end());
  std::vector<double> joint_b(b.grad().begin(), b.grad().end());

  w.zero_grad();
  b.zero_grad();
  loss1().backward();
  loss2().backward();
  for (std::size_t i = 0; i < joint_w.size(); ++i) REQUIRE(w.grad()[i] == Catch::Approx(joint_w[i]).margin(1e-12));
  for (std::size_t i = 0; i < joint_b.size(); ++i) REQUIRE(b.grad()[i] == Catch::Approx(joint_b[i]).margin(1e-12));
}

TEST_CASE("a shared subexpression receives gradient from every consumer", "[autograd]") {
  Tensor<double> a({2}, {0.5, -1.5}, true);
  auto s = sigmoid(a);
  auto loss = sum(add(mul(s, s), s));
  loss.backward();
  for (std::size_t i = 0; i < 2; ++i) {
    const double v = 1.0 / (1.0 + std::exp(-a.data()[i]));
    REQUIRE(a.grad()[i] == Catch::Approx((2 * v + 1) * v * (1 - v)).epsilon(1e-12));
  }
}

TEST_CASE("graph order puts every input before its consumer", "[autograd]") {
  std::mt19937_64 rng(5);
  auto x = random_tensor<float>({1, 2, 5, 5}, rng, -1, 1, true);
  auto w = random_tensor<float>({2, 2, 3, 3}, rng, -1, 1, true);
  auto b = random_tensor<float>({2}, rng, -1, 1, true);
  auto h = relu(conv2d(x, w, b, 1, 1));
  auto loss = sum(add(mul_broadcast(h, sigmoid(global_avg_pool(h))), x));
  auto graph = build_graph(loss);
  REQUIRE(graph.nodes.back() == loss.node().get());
  std::set<const void*> seen;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    REQUIRE(seen.insert(graph.nodes[i]).second);
    for (std::size_t j : graph.inputs[i]) REQUIRE(j < i);
  }
}

TEST_CASE("no-grad mode builds constants", "[autograd]") {
  std::mt19937_64 rng(6);
  auto a = random_tensor<float>({3}, rng, -1, 1, true);
  {
    NoGradGuard guard;
    REQUIRE_FALSE(grad_mode_enabled());
    auto y = relu(a);
    REQUIRE_FALSE(y.requires_grad());
  }
  REQUIRE(grad_mode_enabled());
  REQUIRE(relu(a).requires_grad());
}
