// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic-noise training data: AWGN corruption, augmented patch sampling
// and batch assembly. All randomness derives from explicit seeds; a batch is
// a pure function of (master seed, iteration).

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "ridnet/image.hpp"

namespace ridnet {

// splitmix64-style mixing of a master seed with stream/index tags.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

struct NoiseSpec {
  double sigma = 25.0;  // standard deviation on the 0-255 scale
  std::uint64_t seed = 0;
};

// i.i.d. N(0, (sigma/255)^2) samples, one per element.
std::vector<float> gaussian_noise(std::size_t count, double sigma, std::mt19937_64& rng);

// clean + noise, not clipped. Used for training pairs.
ImageBuffer add_awgn_unclipped(const ImageBuffer& clean, const NoiseSpec& spec);
// clean + noise clipped to [0, 1]. Used for evaluation inputs and files.
ImageBuffer add_awgn(const ImageBuffer& clean, const NoiseSpec& spec);

// Rotation by quarter turns counter-clockwise, applied after an optional
// horizontal flip. The eight combinations form the dihedral group of the
// square.
struct Augmentation {
  int quarter_turns = 0;  // 0..3
  bool flip = false;

  friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

ImageBuffer apply_augmentation(const ImageBuffer& image, const Augmentation& aug);
ImageBuffer crop(const ImageBuffer& image, int top, int left, int height, int width);

struct PatchSample {
  ImageBuffer patch;
  int top = 0;
  int left = 0;
  Augmentation augmentation;
};

// Uniform top-left corner over all valid positions and a uniform draw from
// the eight augmentations.
PatchSample sample_patch(const ImageBuffer& image, int size, std::mt19937_64& rng);

struct BatchConfig {
  int batch = 32;
  int patch = 80;
  double sigma = 25.0;
  // When > sigma, each batch draws its noise level uniformly from
  // [sigma, sigma_max] (blind training).
  double sigma_max = 0.0;
};

struct PatchBatch {
  Tensor<float> noisy;  // N x C x P x P, clean + noise, unclipped
  Tensor<float> clean;  // N x C x P x P
  std::vector<float> noise;
  double sigma = 0.0;
};

PatchBatch make_batch(const std::vector<ImageBuffer>& corpus, const BatchConfig& config, std::mt19937_64& rng);

// Seed of the batch drawn at `iteration` of a run seeded with `seed`.
std::uint64_t batch_seed(std::uint64_t seed, std::int64_t iteration);

// Batch for training iteration `iteration`, independent of any other batch.
PatchBatch make_batch_for_iteration(const std::vector<ImageBuffer>& corpus, const BatchConfig& config,
                                    std::uint64_t seed, std::int64_t iteration);

// Reads every *.pgm / *.ppm file in `dir`. All images must share a channel count.
std::vector<ImageBuffer> load_corpus(const std::filesystem::path& dir);

// Background producer assembling batches for iterations [first, last) into a
// bounded queue. Batches arrive in iteration order.
class BatchProducer {
 public:
  BatchProducer(const std::vector<ImageBuffer>& corpus, BatchConfig config, std::uint64_t seed, std::int64_t first,
                std::int64_t last, std::size_t capacity = 2);
  ~BatchProducer();
  BatchProducer(const BatchProducer&) = delete;
  BatchProducer& operator=(const BatchProducer&) = delete;

  // Blocks until the next batch is ready. Rethrows producer errors.
  PatchBatch next();

 private:
  void run(std::stop_token stop);

  const std::vector<ImageBuffer>& corpus_;
  BatchConfig config_;
  std::uint64_t seed_;
  std::int64_t next_iter_;
  std::int64_t last_;
  std::size_t capacity_;

  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::deque<PatchBatch> queue_;
  std::exception_ptr error_;
  bool done_ = false;
  std::jthread worker_;
};

}  // namespace ridnet
