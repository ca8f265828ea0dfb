// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ridnet/dataset.hpp"
#include "ridnet/metrics.hpp"
#include "test_support.hpp"

using namespace ridnet;
using testing::thrown_code;

TEST_CASE("a uniform 0.1 offset scores 20 dB", "[metrics]") {
  ImageBuffer a(1, 16, 16, 0.5f), b(1, 16, 16, 0.5f);
  for (auto& v : b.data) v = 0.6f;
  // float(0.6) - float(0.5) is not exactly 0.1, so compare through the mse.
  const double d = double(0.6f) - double(0.5f);
  REQUIRE(psnr(a, b) == Catch::Approx(10.0 * std::log10(1.0 / (d * d))).margin(1e-9));
  REQUIRE(psnr(a, b) == Catch::Approx(20.0).margin(1e-5));
  REQUIRE(psnr(a, a) == kPsnrCap);
}

TEST_CASE("psnr and mse agree with the loop oracle", "[metrics]") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    auto a = testing::random_image(i % 2 ? 3 : 1, 17 + i, 23, rng);
    auto b = testing::random_image(a.channels, a.height, a.width, rng);
    REQUIRE(std::abs(mse(a, b) - testing::loop_mse(a, b)) < 1e-12);
    REQUIRE(std::abs(psnr(a, b) - testing::loop_psnr(a, b)) < 1e-6);
    REQUIRE(psnr(a, b) == psnr(b, a));
  }
  REQUIRE(thrown_code([] { psnr(ImageBuffer(1, 4, 4), ImageBuffer(1, 4, 5)); }) == Errc::shape_mismatch);
}

TEST_CASE("psnr falls as the noise grows", "[metrics]") {
  ImageBuffer clean(1, 64, 64, 0.5f);
  double last = kPsnrCap;
  for (double sigma : {5.0, 15.0, 25.0, 50.0}) {
    const double p = psnr(add_awgn(clean, {sigma, 3}), clean);
    REQUIRE(p < last);
    // Unclipped AWGN at this level has an expected PSNR of 20 log10(255 / sigma).
    REQUIRE(p == Catch::Approx(20.0 * std::log10(255.0 / sigma)).margin(0.15));
    last = p;
  }
}

TEST_CASE("ssim of an image with itself is exactly one", "[metrics]") {
  std::mt19937_64 rng(2);
  for (int c : {1, 3}) {
    auto a = testing::random_image(c, 20, 31, rng);
    REQUIRE(ssim(a, a) == 1.0);
  }
}

TEST_CASE("ssim agrees with the full-window loop oracle", "[metrics]") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 6; ++i) {
    auto a = testing::random_image(i % 2 ? 3 : 1, 11 + 3 * i, 14 + 2 * i, rng);
    auto b = add_awgn(a, {10.0 + 10.0 * i, std::uint64_t(i)});
    const double s = ssim(b, a);
    REQUIRE(std::abs(s - testing::loop_ssim(b, a)) < 1e-6);
    REQUIRE(std::abs(s - ssim(a, b)) < 1e-12);
    REQUIRE(s >= -1.0);
    REQUIRE(s <= 1.0);
  }
}

TEST_CASE("constant images have the closed-form ssim", "[metrics]") {
  ImageBuffer a(1, 12, 12, 0.3f), b(1, 12, 12, 0.7f);
  const double p = 0.3f, q = 0.7f, c1 = 1e-4;
  REQUIRE(ssim(a, b) == Catch::Approx((2 * p * q + c1) / (p * p + q * q + c1)).margin(1e-9));
}

TEST_CASE("inverted binary images have strongly negative ssim", "[metrics]") {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  ImageBuffer x(1, 32, 32), y(1, 32, 32);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x.data[i] = coin(rng) ? 1.0f : 0.0f;
    y.data[i] = 1.0f - x.data[i];
  }
  REQUIRE(ssim(x, y) < -0.9);
}

TEST_CASE("ssim is local: a shared crop offset does not matter", "[metrics]") {
  std::mt19937_64 rng(5);
  auto a = testing::random_image(1, 24, 24, rng);
  auto b = add_awgn(a, {30.0, 8});
  // Cropping both images by the same amount keeps the windows that fit.
  auto ca = crop(a, 2, 3, 20, 18), cb = crop(b, 2, 3, 20, 18);
  REQUIRE(std::abs(ssim(ca, cb) - testing::loop_ssim(ca, cb)) < 1e-6);
}

TEST_CASE("ssim needs room for one window", "[metrics]") {
  REQUIRE(thrown_code([] { ssim(ImageBuffer(1, 10, 40), ImageBuffer(1, 10, 40)); }) == Errc::invalid_argument);
  REQUIRE_NOTHROW(ssim(ImageBuffer(1, 11, 11), ImageBuffer(1, 11, 11)));
}

TEST_CASE("metric reports list every image and the mean", "[metrics]") {
  std::mt19937_64 rng(6);
  MetricReport report;
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    auto clean = testing::random_image(1, 16, 16, rng);
    auto noisy = add_awgn(clean, {20.0, std::uint64_t(i)});
    report.add("im" + std::to_string(i), noisy, clean);
    sum += psnr(noisy, clean);
  }
  REQUIRE(report.mean_psnr() == Catch::Approx(sum / 4).margin(1e-12));
  const auto csv = report.to_csv();
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 6);
  REQUIRE(csv.rfind("mean,", std::string::npos) != std::string::npos);
  REQUIRE(csv.substr(0, 15) == "image,psnr,ssim");
}
