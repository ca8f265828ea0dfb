// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "ridnet/train.hpp"
#include "test_support.hpp"

using namespace ridnet;
using testing::random_tensor;
using testing::thrown_code;

namespace {

NetworkConfig tiny_net() {
  NetworkConfig cfg;
  cfg.num_eams = 2;
  cfg.channels = 8;
  cfg.attention_reduction = 4;
  return cfg;
}

TrainConfig tiny_train(std::int64_t iters, std::uint64_t seed = 1) {
  TrainConfig t;
  t.lr0 = 1e-3;
  t.lr_halving_interval = 1000;
  t.batch = 4;
  t.patch = 16;
  t.max_iters = iters;
  t.seed = seed;
  t.checkpoint_every = 1000;
  return t;
}

std::vector<ImageBuffer> tiny_corpus(std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  return {testing::random_image(1, 24, 24, rng), testing::random_image(1, 30, 20, rng)};
}

}  // namespace

TEST_CASE("l1 loss follows its definition", "[train]") {
  Tensor<double> a({1}, std::vector<double>{0.5}), b({1}, std::vector<double>{0.7});
  REQUIRE(l1_loss(a, b).item() == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(l1_loss(a, a).item() == 0.0);

  std::mt19937_64 rng(1);
  auto p = random_tensor<float>({3, 2, 5, 4}, rng);
  auto t = random_tensor<float>({3, 2, 5, 4}, rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.numel(); ++i) acc += std::abs(double(p.data()[i]) - double(t.data()[i]));
  REQUIRE(l1_loss(p, t).item() == Catch::Approx(acc / double(p.numel())).margin(1e-6));
  REQUIRE(thrown_code([&] { l1_loss(p, Tensor<float>({3, 2, 5, 5})); }) == Errc::shape_mismatch);
}

TEST_CASE("l1 subgradient is zero at exact ties", "[train]") {
  Tensor<double> p({3}, {0.25, 0.5, 1.0}, true);
  Tensor<double> t({3}, {0.0, 0.5, 2.0});
  l1_loss(p, t).backward();
  REQUIRE(p.grad()[0] == Catch::Approx(1.0 / 3.0));
  REQUIRE(p.grad()[1] == 0.0);
  REQUIRE(p.grad()[2] == Catch::Approx(-1.0 / 3.0));
}

TEST_CASE("first Adam step moves by lr", "[train]") {
  std::vector<Tensor<double>> params = {Tensor<double>({1}, std::vector<double>{1.0}, true)};
  params[0].zero_grad();
  params[0].mutable_grad()[0] = 1.0;
  AdamState<double> state;
  adam_step<double>(params, state, 1e-4);
  REQUIRE(state.step == 1);
  REQUIRE(params[0].data()[0] == Catch::Approx(1.0 - 1e-4 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("zero gradients leave a fresh parameter alone and decay moments", "[train]") {
  std::vector<Tensor<double>> params = {Tensor<double>({2}, {0.3, -0.7}, true)};
  params[0].zero_grad();
  AdamState<double> state;
  adam_step<double>(params, state, 1e-2);
  REQUIRE(params[0].data()[0] == 0.3);
  REQUIRE(params[0].data()[1] == -0.7);

  params[0].mutable_grad()[0] = 2.0;
  adam_step<double>(params, state, 1e-2);
  const double m = state.m[0][0], v = state.v[0][0];
  params[0].mutable_grad()[0] = 0.0;
  adam_step<double>(params, state, 1e-2);
  REQUIRE(state.m[0][0] == 0.9 * m);
  REQUIRE(state.v[0][0] == 0.999 * v);
}

TEST_CASE("Adam with a zero learning rate is a no-op", "[train]") {
  std::mt19937_64 rng(2);
  std::vector<Tensor<float>> params = {random_tensor<float>({4, 3}, rng, -1, 1, true)};
  const std::vector<float> before(params[0].data().begin(), params[0].data().end());
  params[0].zero_grad();
  for (auto& g : params[0].mutable_grad()) g = 0.5f;
  AdamState<float> state;
  for (int i = 0; i < 3; ++i) adam_step<float>(params, state, 0.0);
  REQUIRE(std::vector<float>(params[0].data().begin(), params[0].data().end()) == before);
}

TEST_CASE("three Adam steps on a quadratic follow the hand trace", "[train]") {
  // f(p) = (p - 3)^2, g = 2 (p - 3), from p = 0 with lr 0.1.
  std::vector<Tensor<double>> params = {Tensor<double>({1}, std::vector<double>{0.0}, true)};
  AdamState<double> state;
  double p = 0.0, m = 0.0, v = 0.0;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.1;
  for (int t = 1; t <= 3; ++t) {
    params[0].zero_grad();
    params[0].mutable_grad()[0] = 2.0 * (params[0].data()[0] - 3.0);
    adam_step<double>(params, state, lr);

    const double g = 2.0 * (p - 3.0);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    p -= lr * mh / (std::sqrt(vh) + eps);
    REQUIRE(std::abs(params[0].data()[0] - p) < 1e-10);
  }
  // Early Adam steps move by roughly lr toward the optimum.
  REQUIRE(p == Catch::Approx(0.3).margin(1e-3));
}

TEST_CASE("Adam requires populated gradients", "[train]") {
  std::vector<Tensor<float>> params = {Tensor<float>({2}, {1, 2})};
  AdamState<float> state;
  REQUIRE(thrown_code([&] { adam_step<float>(params, state, 1e-3); }) == Errc::graph_state);
}

TEST_CASE("the learning rate halves every interval", "[train]") {
  TrainConfig def;
  REQUIRE(def.lr0 == 1e-4);
  REQUIRE(def.lr_halving_interval == 100000);
  REQUIRE(lr_schedule(0, def.lr0, def.lr_halving_interval) == 1e-4);
  REQUIRE(lr_schedule(99999, def.lr0, def.lr_halving_interval) == 1e-4);
  REQUIRE(lr_schedule(100000, def.lr0, def.lr_halving_interval) == 5e-5);
  REQUIRE(lr_schedule(200000, def.lr0, def.lr_halving_interval) == 2.5e-5);
  REQUIRE(lr_schedule(350000, def.lr0, def.lr_halving_interval) == 1.25e-5);
  REQUIRE(thrown_code([] { lr_schedule(-1, 1e-4, 10); }) == Errc::invalid_argument);
}

TEST_CASE("train config validation rejects nonsense", "[train]") {
  auto check = [](auto mutate) {
    TrainConfig t;
    mutate(t);
    return thrown_code([&] { t.validate(); });
  };
  REQUIRE(check([](TrainConfig&) {}) == std::nullopt);
  REQUIRE(check([](TrainConfig& t) { t.lr0 = 0; }) == Errc::config);
  REQUIRE(check([](TrainConfig& t) { t.batch = 0; }) == Errc::config);
  REQUIRE(check([](TrainConfig& t) { t.sigma = -1; }) == Errc::config);
  REQUIRE(check([](TrainConfig& t) { t.adam.beta1 = 1.0; }) == Errc::config);
  REQUIRE(check([](TrainConfig& t) { t.checkpoint_every = 0; }) == Errc::config);
}

TEST_CASE("training runs are reproducible", "[train]") {
  auto corpus = tiny_corpus();
  auto run = [&] {
    auto net = RIDNet::initialized(tiny_net(), 5);
    TrainState state;
    return train(net, corpus, tiny_train(12), state).log;
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].iter == std::int64_t(i));
    REQUIRE(a[i].loss == b[i].loss);
    REQUIRE(a[i].lr == b[i].lr);
  }
}

TEST_CASE("resuming from a checkpoint reproduces the unbroken run", "[train]") {
  testing::TempDir dir("resume");
  auto corpus = tiny_corpus();
  auto cfg = tiny_train(16);
  cfg.checkpoint_every = 7;

  auto unbroken_net = RIDNet::initialized(tiny_net(), 6);
  TrainState unbroken_state;
  std::vector<std::int64_t> saved_at;
  TrainCallbacks cb;
  cb.on_checkpoint = [&](std::int64_t done, RIDNet& n, const TrainState& s) {
    saved_at.push_back(done);
    if (done == 7) save_checkpoint(n, dir / "k7.ckpt", training_state_records(n, s));
  };
  auto full = train(unbroken_net, corpus, cfg, unbroken_state, cb).log;
  REQUIRE(saved_at == std::vector<std::int64_t>{7, 14, 16});

  auto loaded = load_checkpoint(dir / "k7.ckpt");
  auto state = training_state_from(loaded);
  REQUIRE(state.next_iter == 7);
  REQUIRE(state.adam.step == 7);
  auto net = loaded.net;
  auto rest = train(net, corpus, cfg, state).log;
  REQUIRE(rest.size() == 9);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    REQUIRE(rest[i].iter == full[7 + i].iter);
    REQUIRE(rest[i].loss == full[7 + i].loss);
  }
  auto a = unbroken_net.parameters();
  auto b = net.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(testing::bit_equal(a[i].tensor.data(), b[i].tensor.data()));
}

TEST_CASE("training reduces the loss on a tiny corpus", "[train]") {
  std::mt19937_64 rng(7);
  std::vector<ImageBuffer> corpus = {testing::random_image(1, 20, 20, rng)};
  auto net = RIDNet::initialized(tiny_net(), 7);
  TrainState state;
  auto cfg = tiny_train(150);
  auto log = train(net, corpus, cfg, state).log;
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 50; ++i) {
    first += log[i].loss;
    last += log[log.size() - 1 - i].loss;
  }
  REQUIRE(last < first);
}

TEST_CASE("training stays finite across seeds", "[train]") {
  auto corpus = tiny_corpus(11);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto net = RIDNet::initialized(tiny_net(), seed);
    TrainState state;
    for (const auto& r : train(net, corpus, tiny_train(8, seed), state).log) REQUIRE(std::isfinite(r.loss));
    for (auto& p : net.parameters())
      for (float v : p.tensor.data()) REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("a non-finite loss aborts with the iteration and batch seed", "[train]") {
  ImageBuffer bad(1, 16, 16, 0.5f);
  for (auto& v : bad.data) v = std::numeric_limits<float>::quiet_NaN();
  auto net = RIDNet::initialized(tiny_net(), 1);
  TrainState state;
  try {
    train(net, {bad}, tiny_train(3), state);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::numeric);
    const std::string what = e.what();
    REQUIRE(what.find("iteration 0") != std::string::npos);
    REQUIRE(what.find("batch seed " + std::to_string(batch_seed(1, 0))) != std::string::npos);
  }
}

TEST_CASE("training rejects a mismatched corpus", "[train]") {
  auto net = RIDNet::initialized(tiny_net(), 1);
  TrainState state;
  std::mt19937_64 rng(1);
  REQUIRE(thrown_code([&] { train(net, {}, tiny_train(1), state); }) == Errc::io);
  REQUIRE(thrown_code([&] { train(net, {testing::random_image(3, 20, 20, rng)}, tiny_train(1), state); }) ==
          Errc::config);
}

TEST_CASE("loss log is CSV with full precision and appends", "[train]") {
  testing::TempDir dir("log");
  const auto path = dir / "loss.csv";
  write_loss_log(path, {{0, 0.1, 1e-4}, {1, 1.0 / 3.0, 1e-4}});
  write_loss_log(path, {{2, 0.25, 5e-5}}, true);
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  REQUIRE(lines[0] == "iter,loss,lr");
  REQUIRE(lines[1] == "0,0.10000000000000001,0.0001");
  REQUIRE(std::stod(lines[2].substr(2, lines[2].find(',', 2) - 2)) == 1.0 / 3.0);
  REQUIRE(lines[3] == "2,0.25,5.0000000000000002e-05");
}

TEST_CASE("denoise with a zero network returns the clipped input", "[train]") {
  std::mt19937_64 rng(4);
  auto img = testing::random_image(1, 9, 11, rng);
  img.data[0] = 1.5f;
  auto out = denoise(RIDNet::zeros(tiny_net()), img);
  REQUIRE(out.data == clipped(img).data);
  REQUIRE(thrown_code([&] { denoise(RIDNet::zeros(tiny_net()), testing::random_image(3, 9, 9, rng)); }) ==
          Errc::shape_mismatch);
}

TEST_CASE("optimizer moments survive the checkpoint", "[train]") {
  auto net = RIDNet::initialized(tiny_net(), 2);
  TrainState state;
  train(net, tiny_corpus(), tiny_train(2), state);
  auto loaded = deserialize_checkpoint(serialize_checkpoint(net, training_state_records(net, state)));
  auto back = training_state_from(loaded);
  REQUIRE(back.next_iter == 2);
  REQUIRE(back.adam.step == 2);
  REQUIRE(back.adam.m == state.adam.m);
  REQUIRE(back.adam.v == state.adam.v);

  // Missing moments for one parameter is a shape error.
  auto extras = training_state_records(net, state);
  extras.erase(std::remove_if(extras.begin(), extras.end(), [](const auto& r) { return r.name == "adam.v.tail.bias"; }),
               extras.end());
  auto partial = deserialize_checkpoint(serialize_checkpoint(net, extras));
  REQUIRE(thrown_code([&] { training_state_from(partial); }) == Errc::checkpoint_shape);
}
