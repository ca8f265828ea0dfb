// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/dataset.hpp"

#include <algorithm>

namespace ridnet {

namespace {

constexpr std::uint64_t kBatchStream = 0x6261746368ULL;  // "batch"

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

std::vector<float> gaussian_noise(std::size_t count, double sigma, std::mt19937_64& rng) {
  if (!(sigma >= 0.0)) fail(Errc::invalid_argument, "noise sigma must be non-negative");
  std::vector<float> out(count, 0.0f);
  if (sigma == 0.0) return out;
  std::normal_distribution<double> dist(0.0, sigma / 255.0);
  for (float& v : out) v = static_cast<float>(dist(rng));
  return out;
}

ImageBuffer add_awgn_unclipped(const ImageBuffer& clean, const NoiseSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  const auto noise = gaussian_noise(clean.size(), spec.sigma, rng);
  ImageBuffer out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += noise[i];
  return out;
}

ImageBuffer add_awgn(const ImageBuffer& clean, const NoiseSpec& spec) { return clipped(add_awgn_unclipped(clean, spec)); }

ImageBuffer apply_augmentation(const ImageBuffer& image, const Augmentation& aug) {
  ImageBuffer cur = image;
  if (aug.flip) {
    for (int c = 0; c < cur.channels; ++c) {
      for (int y = 0; y < cur.height; ++y) {
        for (int x = 0; x < cur.width / 2; ++x) std::swap(cur.at(c, y, x), cur.at(c, y, cur.width - 1 - x));
      }
    }
  }
  const int turns = ((aug.quarter_turns % 4) + 4) % 4;
  for (int t = 0; t < turns; ++t) {
    ImageBuffer rotated(cur.channels, cur.width, cur.height);
    for (int c = 0; c < cur.channels; ++c) {
      for (int y = 0; y < rotated.height; ++y) {
        for (int x = 0; x < rotated.width; ++x) rotated.at(c, y, x) = cur.at(c, x, cur.width - 1 - y);
      }
    }
    cur = std::move(rotated);
  }
  return cur;
}

ImageBuffer crop(const ImageBuffer& image, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height < 1 || width < 1 || top + height > image.height || left + width > image.width) {
    fail(Errc::invalid_argument, "crop window lies outside the image");
  }
  ImageBuffer out(image.channels, height, width);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < height; ++y) {
      const auto src = image.data.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(c) * image.height + top + y) * image.width + left);
      std::copy_n(src, width, &out.at(c, y, 0));
    }
  }
  return out;
}

PatchSample sample_patch(const ImageBuffer& image, int size, std::mt19937_64& rng) {
  if (size < 1) fail(Errc::invalid_argument, "patch size must be positive");
  if (image.height < size || image.width < size) {
    fail(Errc::invalid_argument, "image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                                     " is smaller than the " + std::to_string(size) + " pixel patch");
  }
  PatchSample s;
  s.top = std::uniform_int_distribution<int>(0, image.height - size)(rng);
  s.left = std::uniform_int_distribution<int>(0, image.width - size)(rng);
  const int variant = std::uniform_int_distribution<int>(0, 7)(rng);
  s.augmentation = {variant % 4, variant >= 4};
  s.patch = apply_augmentation(crop(image, s.top, s.left, size, size), s.augmentation);
  return s;
}

PatchBatch make_batch(const std::vector<ImageBuffer>& corpus, const BatchConfig& config, std::mt19937_64& rng) {
  if (corpus.empty()) fail(Errc::invalid_argument, "make_batch: empty corpus");
  if (config.batch < 1 || config.patch < 1) fail(Errc::invalid_argument, "make_batch: batch and patch must be positive");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].channels != corpus.front().channels) {
      fail(Errc::invalid_argument, "make_batch: corpus mixes channel counts");
    }
    if (corpus[i].height >= config.patch && corpus[i].width >= config.patch) eligible.push_back(i);
  }
  if (eligible.empty()) {
    fail(Errc::invalid_argument, "make_batch: every corpus image is smaller than the " + std::to_string(config.patch) +
                                     " pixel patch");
  }

  PatchBatch b;
  b.sigma = config.sigma;
  if (config.sigma_max > config.sigma) b.sigma = std::uniform_real_distribution<double>(config.sigma, config.sigma_max)(rng);

  const auto n = static_cast<std::size_t>(config.batch);
  const auto c = static_cast<std::size_t>(corpus.front().channels);
  const auto p = static_cast<std::size_t>(config.patch);
  const std::size_t item = c * p * p;
  std::vector<float> clean(n * item);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const PatchSample s = sample_patch(corpus[eligible[pick(rng)]], config.patch, rng);
    std::copy(s.patch.data.begin(), s.patch.data.end(), clean.begin() + static_cast<std::ptrdiff_t>(i * item));
  }
  b.noise = gaussian_noise(n * item, b.sigma, rng);
  std::vector<float> noisy(n * item);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] = clean[i] + b.noise[i];
  b.clean = Tensor<float>({n, c, p, p}, std::move(clean));
  b.noisy = Tensor<float>({n, c, p, p}, std::move(noisy));
  return b;
}

std::uint64_t batch_seed(std::uint64_t seed, std::int64_t iteration) {
  return derive_seed(seed, kBatchStream, static_cast<std::uint64_t>(iteration));
}

PatchBatch make_batch_for_iteration(const std::vector<ImageBuffer>& corpus, const BatchConfig& config,
                                    std::uint64_t seed, std::int64_t iteration) {
  std::mt19937_64 rng(batch_seed(seed, iteration));
  return make_batch(corpus, config, rng);
}

std::vector<ImageBuffer> load_corpus(const std::filesystem::path& dir) {
  std::vector<ImageBuffer> out;
  for (const auto& path : list_images(dir)) out.push_back(read_image(path));
  if (out.empty()) fail(Errc::io, "no .pgm/.ppm images found in '" + dir.string() + "'");
  for (const auto& img : out) {
    if (img.channels != out.front().channels) fail(Errc::io, "corpus '" + dir.string() + "' mixes gray and color images");
  }
  return out;
}

BatchProducer::BatchProducer(const std::vector<ImageBuffer>& corpus, BatchConfig config, std::uint64_t seed,
                             std::int64_t first, std::int64_t last, std::size_t capacity)
    : corpus_(corpus),
      config_(config),
      seed_(seed),
      next_iter_(first),
      last_(last),
      capacity_(std::max<std::size_t>(capacity, 1)),
      worker_([this](std::stop_token stop) { run(stop); }) {}

BatchProducer::~BatchProducer() {
  worker_.request_stop();
  cv_.notify_all();
}

void BatchProducer::run(std::stop_token stop) {
  try {
    for (std::int64_t it = next_iter_; it < last_; ++it) {
      PatchBatch batch = make_batch_for_iteration(corpus_, config_, seed_, it);
      std::unique_lock lock(mutex_);
      if (!cv_.wait(lock, stop, [&] { return queue_.size() < capacity_; })) return;
      queue_.push_back(std::move(batch));
      cv_.notify_all();
    }
  } catch (...) {
    std::lock_guard lock(mutex_);
    error_ = std::current_exception();
  }
  std::lock_guard lock(mutex_);
  done_ = true;
  cv_.notify_all();
}

PatchBatch BatchProducer::next() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !queue_.empty() || done_; });
  if (queue_.empty()) {
    if (error_) std::rethrow_exception(error_);
    fail(Errc::invalid_argument, "BatchProducer: no batches left");
  }
  PatchBatch b = std::move(queue_.front());
  queue_.pop_front();
  cv_.notify_all();
  return b;
}

}  // namespace ridnet
