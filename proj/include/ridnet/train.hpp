// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ridnet/checkpoint.hpp"
#include "ridnet/dataset.hpp"
#include "ridnet/model.hpp"
#include "ridnet/ops.hpp"

namespace ridnet {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double lr0 = 1e-4;
  std::int64_t lr_halving_interval = 100000;
  int batch = 32;
  int patch = 80;
  double sigma = 25.0;
  double sigma_max = 0.0;  // > sigma enables per-batch blind noise levels
  std::int64_t max_iters = 10000;
  std::uint64_t seed = 1;
  AdamHyper adam;
  std::int64_t checkpoint_every = 1000;

  void validate() const;
  BatchConfig batch_config() const { return {batch, patch, sigma, sigma_max}; }
};

// lr0 * 2^-floor(iter / interval)
double lr_schedule(std::int64_t iter, double lr0, std::int64_t interval);

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update of every parameter from its grad buffer.
// Moment buffers are created on the first call.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state, double lr, const AdamHyper& hyper = {});

struct LossRecord {
  std::int64_t iter = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainState {
  AdamState<float> adam;
  std::int64_t next_iter = 0;
};

struct TrainCallbacks {
  std::function<void(const LossRecord&)> on_iteration;
  // Called after iteration `completed - 1` whenever `completed` is a multiple
  // of checkpoint_every, and once at the end.
  std::function<void(std::int64_t completed, RIDNet& net, const TrainState& state)> on_checkpoint;
};

struct TrainResult {
  std::vector<LossRecord> log;
};

// Runs iterations [state.next_iter, config.max_iters): batch -> forward ->
// l1 loss -> backward -> Adam. Iteration i always sees the same batch and
// learning rate, so resuming from a saved state reproduces an unbroken run.
// Throws Errc::numeric on a non-finite loss.
TrainResult train(RIDNet& net, const std::vector<ImageBuffer>& corpus, const TrainConfig& config, TrainState& state,
                  const TrainCallbacks& callbacks = {});

// Optimizer state and iteration counter as checkpoint extras.
std::vector<CheckpointRecord> training_state_records(RIDNet& net, const TrainState& state);
TrainState training_state_from(const LoadedCheckpoint& checkpoint);

void write_loss_log(const std::filesystem::path& path, const std::vector<LossRecord>& log, bool append = false);

// Denoises one image with gradients disabled; output clipped to [0, 1].
ImageBuffer denoise(const RIDNet& net, const ImageBuffer& noisy);

}  // namespace ridnet
