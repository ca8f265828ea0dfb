// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ridnet/ops.hpp"
#include "test_support.hpp"

using namespace ridnet;
using testing::random_tensor;
using testing::thrown_code;

namespace {

std::vector<double> as_double(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("conv2d with a centred delta kernel is the identity", "[ops]") {
  std::mt19937_64 rng(1);
  auto x = random_tensor<float>({1, 1, 5, 5}, rng);
  Tensor<float> w({1, 1, 3, 3});
  w.mutable_data()[4] = 1.0f;
  Tensor<float> b({1});
  auto y = conv2d(x, w, b, 1, 1);
  REQUIRE(y.shape() == x.shape());
  REQUIRE(testing::bit_equal(y.data(), x.data()));
}

TEST_CASE("conv2d of a zero input with zero bias is zero", "[ops]") {
  std::mt19937_64 rng(2);
  Tensor<float> x({2, 3, 6, 7});
  auto w = random_tensor<float>({4, 3, 3, 3}, rng);
  Tensor<float> b({4});
  auto y = conv2d(x, w, b, 2, 2);
  for (float v : y.data()) REQUIRE(v == 0.0f);
}

TEST_CASE("dilated conv2d matches the nested-loop oracle", "[ops]") {
  std::mt19937_64 rng(3);
  auto x = random_tensor<float>({2, 3, 8, 8}, rng);
  auto w = random_tensor<float>({4, 3, 3, 3}, rng);
  auto b = random_tensor<float>({4}, rng);
  auto y = conv2d(x, w, b, 2, 2);
  auto oracle = testing::naive_conv(as_double(x.data()), 2, 3, 8, 8, as_double(w.data()), 4, 3, as_double(b.data()),
                                    2, 2);
  REQUIRE(y.shape() == Shape{2, 4, 8, 8});
  REQUIRE(testing::max_rel_diff(y.data(), oracle) < 1e-5);
}

TEST_CASE("conv2d matches the oracle over random geometries", "[ops]") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + rng() % 2, c = 1 + rng() % 4, o = 1 + rng() % 5;
    const int h = 1 + rng() % 12, wd = 1 + rng() % 12;
    const int k = (rng() % 3 == 0) ? 1 : 3;
    const int d = 1 + rng() % 4;
    const int p = d * (k - 1) / 2;
    auto x = random_tensor<float>({std::size_t(n), std::size_t(c), std::size_t(h), std::size_t(wd)}, rng);
    auto w = random_tensor<float>({std::size_t(o), std::size_t(c), std::size_t(k), std::size_t(k)}, rng);
    auto b = random_tensor<float>({std::size_t(o)}, rng);
    auto y = conv2d(x, w, b, d, p);
    auto oracle =
        testing::naive_conv(as_double(x.data()), n, c, h, wd, as_double(w.data()), o, k, as_double(b.data()), d, p);
    INFO("trial " << trial);
    REQUIRE(testing::max_rel_diff(y.data(), oracle) < 1e-5);
  }
}

TEST_CASE("conv2d is linear in its input", "[ops]") {
  std::mt19937_64 rng(5);
  auto x = random_tensor<double>({1, 3, 9, 9}, rng);
  auto z = random_tensor<double>({1, 3, 9, 9}, rng);
  auto w = random_tensor<double>({2, 3, 3, 3}, rng);
  Tensor<double> b({2});
  const double alpha = 0.7, beta = -1.3;
  std::vector<double> mix(x.numel());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * x.data()[i] + beta * z.data()[i];
  auto lhs = conv2d(Tensor<double>({1, 3, 9, 9}, mix), w, b, 3, 3);
  auto cx = conv2d(x, w, b, 3, 3);
  auto cz = conv2d(z, w, b, 3, 3);
  for (std::size_t i = 0; i < lhs.numel(); ++i) {
    REQUIRE(lhs.data()[i] == Catch::Approx(alpha * cx.data()[i] + beta * cz.data()[i]).margin(1e-5));
  }
}

TEST_CASE("conv2d is linear in its weights", "[ops]") {
  std::mt19937_64 rng(6);
  auto x = random_tensor<float>({2, 2, 7, 5}, rng);
  auto w1 = random_tensor<float>({3, 2, 3, 3}, rng);
  auto w2 = random_tensor<float>({3, 2, 3, 3}, rng);
  Tensor<float> b({3});
  std::vector<float> sum(w1.numel());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = w1.data()[i] + w2.data()[i];
  auto lhs = conv2d(x, Tensor<float>(w1.shape(), sum), b, 1, 1);
  auto y1 = conv2d(x, w1, b, 1, 1);
  auto y2 = conv2d(x, w2, b, 1, 1);
  for (std::size_t i = 0; i < lhs.numel(); ++i) {
    REQUIRE(lhs.data()[i] == Catch::Approx(y1.data()[i] + y2.data()[i]).margin(1e-5));
  }
}

TEST_CASE("dilated 3x3 receptive field is (2d+1) square", "[ops]") {
  for (int d = 1; d <= 4; ++d) {
    const std::size_t size = 2 * 4 + 1 + 2;
    Tensor<float> x({1, 1, size, size});
    x.mutable_data()[(size / 2) * size + size / 2] = 1.0f;
    auto w = Tensor<float>::full({1, 1, 3, 3}, 1.0f);
    auto y = conv2d(x, w, Tensor<float>({1}), d, d);
    int rows_hit = 0, cols_min = int(size), cols_max = -1, rows_min = int(size), rows_max = -1;
    for (std::size_t i = 0; i < y.numel(); ++i) {
      if (y.data()[i] == 0.0f) continue;
      ++rows_hit;
      const int r = int(i / size), c = int(i % size);
      rows_min = std::min(rows_min, r);
      rows_max = std::max(rows_max, r);
      cols_min = std::min(cols_min, c);
      cols_max = std::max(cols_max, c);
    }
    REQUIRE(rows_hit == 9);
    REQUIRE(rows_max - rows_min + 1 == 2 * d + 1);
    REQUIRE(cols_max - cols_min + 1 == 2 * d + 1);
  }
}

TEST_CASE("conv2d rejects bad arguments", "[ops]") {
  Tensor<float> x({1, 2, 4, 4});
  Tensor<float> w({3, 2, 3, 3});
  Tensor<float> b({3});
  REQUIRE(thrown_code([&] { conv2d(x, Tensor<float>({3, 1, 3, 3}), b, 1, 1); }) == Errc::shape_mismatch);
  REQUIRE(thrown_code([&] { conv2d(x, w, b, 0, 1); }) == Errc::invalid_argument);
  REQUIRE(thrown_code([&] { conv2d(x, w, b, -2, 1); }) == Errc::invalid_argument);
  REQUIRE(thrown_code([&] { conv2d(x, Tensor<float>({3, 2, 2, 2}), b, 1, 0); }) == Errc::invalid_argument);
  REQUIRE(thrown_code([&] { conv2d(x, w, b, 4, 0); }) == Errc::invalid_argument);
  REQUIRE(thrown_code([&] { conv2d(x, w, Tensor<float>({2}), 1, 1); }) == Errc::shape_mismatch);
}

TEST_CASE("global_avg_pool averages each channel", "[ops]") {
  Tensor<float> x({1, 1, 2, 2}, {1, 2, 3, 4});
  REQUIRE(global_avg_pool(x).item() == 2.5f);
  REQUIRE(global_avg_pool(Tensor<float>::full({1, 1, 3, 5}, 0.375f)).item() == 0.375f);

  std::mt19937_64 rng(7);
  auto r = random_tensor<double>({1, 3, 7, 5}, rng);
  auto g = global_avg_pool(r);
  REQUIRE(g.shape() == Shape{1, 3, 1, 1});
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 5; ++j) acc += r.data()[(c * 7 + i) * 5 + j];
    REQUIRE(g.data()[c] == Catch::Approx(acc / 35.0).margin(1e-6));
  }
  REQUIRE(thrown_code([] { global_avg_pool(Tensor<float>({1, 2, 0, 3})); }) == Errc::invalid_argument);
}

TEST_CASE("soft_shrink follows its definition", "[ops]") {
  Tensor<double> x({3}, {0.7, -0.2, -1.5});
  auto y = soft_shrink(x, 0.5);
  REQUIRE(y.data()[0] == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(y.data()[1] == 0.0);
  REQUIRE(y.data()[2] == Catch::Approx(-1.0).margin(1e-15));

  std::mt19937_64 rng(8);
  auto r = random_tensor<float>({1000}, rng, -2, 2);
  auto id = soft_shrink(r, 0.0f);
  REQUIRE(testing::bit_equal(id.data(), r.data()));
  const float lambda = 0.6f;
  auto s = soft_shrink(r, lambda);
  for (std::size_t i = 0; i < r.numel(); ++i) {
    REQUIRE((s.data()[i] == 0.0f) == (std::abs(r.data()[i]) <= lambda));
  }
  REQUIRE(thrown_code([&] { soft_shrink(r, -0.1f); }) == Errc::invalid_argument);
}

TEST_CASE("sigmoid is in (0,1) and matches the scalar formula", "[ops]") {
  REQUIRE(sigmoid(Tensor<float>::scalar(0.0f)).item() == 0.5f);
  double prev = 0.5;
  for (double v : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    const double s = sigmoid(Tensor<double>::scalar(v)).item();
    REQUIRE(s > prev);
    REQUIRE(s < 1.0);
    prev = s;
  }
  std::mt19937_64 rng(9);
  auto r = random_tensor<float>({4096}, rng, -30, 30);
  auto y = sigmoid(r);
  for (std::size_t i = 0; i < r.numel(); ++i) {
    const float v = y.data()[i];
    REQUIRE(v > 0.0f);
    REQUIRE(v < 1.0f);
    const double ref = 1.0 / (1.0 + std::exp(-double(r.data()[i])));
    REQUIRE(std::abs(double(v) - ref) < 1e-7);
  }
}

TEST_CASE("elementwise plumbing ops", "[ops]") {
  std::mt19937_64 rng(10);
  auto a = random_tensor<float>({2, 3, 4, 5}, rng);
  auto b = random_tensor<float>({2, 3, 4, 5}, rng);
  auto z = Tensor<float>({2, 3, 4, 5});

  REQUIRE(testing::bit_equal(add(a, z).data(), a.data()));
  auto d = sub(a, b);
  auto p = mul(a, b);
  auto r = relu(a);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    REQUIRE(d.data()[i] == a.data()[i] - b.data()[i]);
    REQUIRE(p.data()[i] == a.data()[i] * b.data()[i]);
    REQUIRE(r.data()[i] == std::max(a.data()[i], 0.0f));
  }
  auto unit = Tensor<float>::full({2, 3, 1, 1}, 1.0f);
  REQUIRE(testing::bit_equal(mul_broadcast(a, unit).data(), a.data()));

  auto gate = random_tensor<float>({2, 3, 1, 1}, rng);
  auto m = mul_broadcast(a, gate);
  for (std::size_t i = 0; i < a.numel(); ++i) REQUIRE(m.data()[i] == a.data()[i] * gate.data()[i / 20]);

  auto c = concat_channels(random_tensor<float>({1, 3, 6, 7}, rng), random_tensor<float>({1, 5, 6, 7}, rng));
  REQUIRE(c.shape() == Shape{1, 8, 6, 7});

  REQUIRE(thrown_code([&] { add(a, Tensor<float>({2, 3, 4, 4})); }) == Errc::shape_mismatch);
  REQUIRE(thrown_code([&] { sub(a, Tensor<float>({2, 3, 5, 4})); }) == Errc::shape_mismatch);
  REQUIRE(thrown_code([&] { mul_broadcast(a, Tensor<float>({2, 2, 1, 1})); }) == Errc::shape_mismatch);
  REQUIRE(thrown_code([&] { concat_channels(a, Tensor<float>({2, 3, 4, 6})); }) == Errc::shape_mismatch);
}

TEST_CASE("concat_channels keeps channel blocks in order", "[ops]") {
  std::mt19937_64 rng(11);
  auto a = random_tensor<float>({2, 1, 2, 2}, rng);
  auto b = random_tensor<float>({2, 2, 2, 2}, rng);
  auto c = concat_channels(a, b);
  for (int n = 0; n < 2; ++n) {
    for (int i = 0; i < 4; ++i) REQUIRE(c.data()[n * 12 + i] == a.data()[n * 4 + i]);
    for (int i = 0; i < 8; ++i) REQUIRE(c.data()[n * 12 + 4 + i] == b.data()[n * 8 + i]);
  }
}
