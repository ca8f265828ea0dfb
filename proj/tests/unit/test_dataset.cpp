// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <random>

#include "ridnet/dataset.hpp"
#include "test_support.hpp"

using namespace ridnet;
using testing::thrown_code;

namespace {

// Upper-tail critical value of chi-square with k degrees of freedom at
// normal quantile z (Wilson-Hilferty).
double chi_square_critical(double k, double z) {
  const double t = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - t + z * std::sqrt(t), 3.0);
}

ImageBuffer ramp(int c, int h, int w) {
  ImageBuffer img(c, h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<float>(i) / static_cast<float>(img.size());
  return img;
}

}  // namespace

TEST_CASE("zero sigma leaves the image unchanged", "[data]") {
  std::mt19937_64 rng(1);
  auto img = testing::random_image(3, 8, 9, rng);
  REQUIRE(add_awgn_unclipped(img, {0.0, 5}).data == img.data);
  REQUIRE(add_awgn(img, {0.0, 5}).data == img.data);
}

TEST_CASE("AWGN moments match sigma/255", "[data]") {
  std::mt19937_64 rng(2024);
  const std::size_t n = 1000000;
  auto noise = gaussian_noise(n, 25.0, rng);
  double mean = 0.0;
  for (float v : noise) mean += v;
  mean /= double(n);
  double var = 0.0;
  for (float v : noise) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / double(n - 1));
  const double s = 25.0 / 255.0;
  REQUIRE(std::abs(mean) < 3.0 * s / 1000.0);
  REQUIRE(std::abs(sd - s) < 0.01 * s);
}

TEST_CASE("AWGN is deterministic in its seed and clipped only on request", "[data]") {
  ImageBuffer img(1, 64, 64, 0.95f);
  auto a = add_awgn_unclipped(img, {25.0, 9});
  auto b = add_awgn_unclipped(img, {25.0, 9});
  REQUIRE(a.data == b.data);
  REQUIRE(add_awgn_unclipped(img, {25.0, 10}).data != a.data);
  bool above = false;
  for (float v : a.data) above = above || v > 1.0f;
  REQUIRE(above);
  for (float v : add_awgn(img, {25.0, 9}).data) {
    REQUIRE(v >= 0.0f);
    REQUIRE(v <= 1.0f);
  }
  REQUIRE(thrown_code([&] { add_awgn(img, {-1.0, 1}); }) == Errc::invalid_argument);
}

TEST_CASE("an image exactly the patch size has one corner", "[data]") {
  std::mt19937_64 rng(3);
  auto img = ramp(1, 80, 80);
  for (int i = 0; i < 50; ++i) {
    auto s = sample_patch(img, 80, rng);
    REQUIRE(s.top == 0);
    REQUIRE(s.left == 0);
  }
  REQUIRE(thrown_code([&] { sample_patch(ramp(1, 79, 100), 80, rng); }) == Errc::invalid_argument);
}

TEST_CASE("four quarter turns are the identity and the eight variants are distinct", "[data]") {
  auto img = ramp(2, 5, 5);
  auto cur = img;
  for (int i = 0; i < 4; ++i) cur = apply_augmentation(cur, {1, false});
  REQUIRE(cur.data == img.data);
  REQUIRE(apply_augmentation(apply_augmentation(img, {0, true}), {0, true}).data == img.data);

  std::set<std::vector<float>> seen;
  for (int t = 0; t < 4; ++t)
    for (bool f : {false, true}) seen.insert(apply_augmentation(img, {t, f}).data);
  REQUIRE(seen.size() == 8);

  // One quarter turn counter-clockwise moves the top-right pixel to the top-left.
  auto rect = ramp(1, 2, 3);
  auto r = apply_augmentation(rect, {1, false});
  REQUIRE(r.height == 3);
  REQUIRE(r.width == 2);
  REQUIRE(r.at(0, 0, 0) == rect.at(0, 0, 2));
  REQUIRE(r.at(0, 2, 0) == rect.at(0, 0, 0));
}

TEST_CASE("patch corners are uniform over all valid positions", "[data]") {
  std::mt19937_64 rng(4);
  ImageBuffer img(1, 160, 160);
  const int size = 80;
  const int side = 160 - size + 1;
  std::vector<int> counts(side * side, 0);
  std::vector<int> variants(8, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto s = sample_patch(img, size, rng);
    ++counts[s.top * side + s.left];
    ++variants[s.augmentation.quarter_turns + (s.augmentation.flip ? 4 : 0)];
  }
  const double expected = double(draws) / counts.size();
  double chi = 0.0;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  // p > 0.01 upper tail
  REQUIRE(chi < chi_square_critical(counts.size() - 1.0, 2.3263));

  double chi_aug = 0.0;
  for (int c : variants) chi_aug += (c - draws / 8.0) * (c - draws / 8.0) / (draws / 8.0);
  REQUIRE(chi_aug < 18.475);  // chi-square(7) at p = 0.01
}

TEST_CASE("a batch has the configured shape and stores its noise", "[data]") {
  std::mt19937_64 rng(5);
  std::vector<ImageBuffer> corpus = {testing::random_image(1, 100, 90, rng), testing::random_image(1, 120, 81, rng)};
  BatchConfig cfg;
  auto b = make_batch(corpus, cfg, rng);
  REQUIRE(cfg.batch == 32);
  REQUIRE(cfg.patch == 80);
  REQUIRE(b.noisy.shape() == Shape{32, 1, 80, 80});
  REQUIRE(b.clean.shape() == Shape{32, 1, 80, 80});
  REQUIRE(b.noise.size() == b.clean.numel());
  for (std::size_t i = 0; i < b.noise.size(); ++i) REQUIRE(b.noisy.data()[i] == b.clean.data()[i] + b.noise[i]);
}

TEST_CASE("zero-sigma batches from one image are clean pairs of crops of it", "[data]") {
  std::mt19937_64 rng(6);
  auto img = ramp(3, 20, 24);
  BatchConfig cfg{6, 8, 0.0, 0.0};
  auto b = make_batch({img}, cfg, rng);
  REQUIRE(testing::bit_equal(b.noisy.data(), b.clean.data()));
  // Every patch is some augmented crop of the source.
  for (std::size_t n = 0; n < 6; ++n) {
    auto patch = tensor_to_image(b.clean, n);
    bool found = false;
    for (int top = 0; top <= 12 && !found; ++top)
      for (int left = 0; left <= 16 && !found; ++left)
        for (int v = 0; v < 8 && !found; ++v)
          found = apply_augmentation(crop(img, top, left, 8, 8), {v % 4, v >= 4}).data == patch.data;
    REQUIRE(found);
  }
}

TEST_CASE("batch noise is white", "[data]") {
  std::mt19937_64 rng(7);
  std::vector<ImageBuffer> corpus = {testing::random_image(1, 64, 64, rng)};
  auto b = make_batch(corpus, {25, 64, 25.0, 0.0}, rng);
  REQUIRE(b.noise.size() >= 100000);
  double mean = 0.0;
  for (float v : b.noise) mean += v;
  mean /= double(b.noise.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < b.noise.size(); ++i) num += (b.noise[i] - mean) * (b.noise[i + 1] - mean);
  for (float v : b.noise) den += (v - mean) * (v - mean);
  REQUIRE(std::abs(num / den) < 0.01);
}

TEST_CASE("batches are pure functions of seed and iteration", "[data]") {
  std::mt19937_64 rng(8);
  std::vector<ImageBuffer> corpus = {testing::random_image(1, 40, 40, rng)};
  BatchConfig cfg{4, 16, 25.0, 0.0};
  auto a = make_batch_for_iteration(corpus, cfg, 3, 17);
  auto b = make_batch_for_iteration(corpus, cfg, 3, 17);
  auto c = make_batch_for_iteration(corpus, cfg, 3, 18);
  auto d = make_batch_for_iteration(corpus, cfg, 4, 17);
  REQUIRE(testing::bit_equal(a.noisy.data(), b.noisy.data()));
  REQUIRE_FALSE(testing::bit_equal(a.noisy.data(), c.noisy.data()));
  REQUIRE_FALSE(testing::bit_equal(a.noisy.data(), d.noisy.data()));

  BatchProducer producer(corpus, cfg, 3, 15, 20);
  for (int i = 15; i < 20; ++i) {
    auto p = producer.next();
    REQUIRE(testing::bit_equal(p.noisy.data(), make_batch_for_iteration(corpus, cfg, 3, i).noisy.data()));
  }
  REQUIRE(thrown_code([&] { producer.next(); }) == Errc::invalid_argument);
}

TEST_CASE("blind batches draw sigma from the configured range", "[data]") {
  std::mt19937_64 rng(9);
  std::vector<ImageBuffer> corpus = {testing::random_image(1, 32, 32, rng)};
  std::map<bool, int> seen;
  for (int i = 0; i < 50; ++i) {
    auto b = make_batch_for_iteration(corpus, {1, 8, 10.0, 50.0}, 1, i);
    REQUIRE(b.sigma >= 10.0);
    REQUIRE(b.sigma <= 50.0);
    seen[b.sigma > 30.0] += 1;
  }
  REQUIRE(seen.size() == 2);
}

TEST_CASE("batch assembly rejects unusable corpora", "[data]") {
  std::mt19937_64 rng(10);
  REQUIRE(thrown_code([&] { make_batch({}, {}, rng); }) == Errc::invalid_argument);
  REQUIRE(thrown_code([&] { make_batch({ImageBuffer(1, 10, 10)}, {2, 16, 25, 0}, rng); }) == Errc::invalid_argument);
  REQUIRE(thrown_code([&] { make_batch({ImageBuffer(1, 20, 20), ImageBuffer(3, 20, 20)}, {2, 16, 25, 0}, rng); }) ==
          Errc::invalid_argument);
  testing::TempDir dir("corpus");
  REQUIRE(thrown_code([&] { load_corpus(dir.path()); }) == Errc::io);
}

TEST_CASE("derived seeds separate streams and indices", "[data]") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t stream = 0; stream < 4; ++stream)
      for (std::uint64_t i = 0; i < 16; ++i) seeds.insert(derive_seed(s, stream, i));
  REQUIRE(seeds.size() == 4 * 4 * 16);
}
