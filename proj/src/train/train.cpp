// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace ridnet {

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(Errc::config, "train config: " + what);
  };
  require(lr0 > 0.0 && std::isfinite(lr0), "lr must be positive");
  require(lr_halving_interval > 0, "lr_halving_interval must be positive");
  require(batch >= 1, "batch must be >= 1");
  require(patch >= 1, "patch must be >= 1");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be non-negative");
  require(sigma_max >= 0.0 && std::isfinite(sigma_max), "sigma_max must be non-negative");
  require(max_iters >= 0, "max_iters must be non-negative");
  require(checkpoint_every > 0, "checkpoint_every must be positive");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "adam_beta1 must lie in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "adam_beta2 must lie in [0, 1)");
  require(adam.eps > 0.0, "adam_eps must be positive");
}

double lr_schedule(std::int64_t iter, double lr0, std::int64_t interval) {
  if (iter < 0) fail(Errc::invalid_argument, "lr_schedule: negative iteration");
  if (interval <= 0) fail(Errc::invalid_argument, "lr_schedule: interval must be positive");
  return std::ldexp(lr0, -static_cast<int>(std::min<std::int64_t>(iter / interval, 4096)));
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state, double lr, const AdamHyper& hyper) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.numel(), T(0));
      state.v.emplace_back(p.numel(), T(0));
    }
  }
  if (state.m.size() != params.size()) fail(Errc::shape_mismatch, "adam_step: optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) fail(Errc::graph_state, "adam_step: parameter " + std::to_string(i) + " has no gradient");
    if (state.m[i].size() != params[i].numel()) fail(Errc::shape_mismatch, "adam_step: moment size mismatch");
  }

  ++state.step;
  const double bias1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::span<T> p = params[i].mutable_data();
    std::span<const T> g = params[i].grad();
    std::vector<T>& m = state.m[i];
    std::vector<T>& v = state.v[i];
    const auto n = static_cast<std::ptrdiff_t>(p.size());
#pragma omp parallel for schedule(static) if (n >= 32768)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = hyper.beta1 * static_cast<double>(m[j]) + (1.0 - hyper.beta1) * gj;
      const double vj = hyper.beta2 * static_cast<double>(v[j]) + (1.0 - hyper.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = lr * (mj / bias1) / (std::sqrt(vj / bias2) + hyper.eps);
      p[j] = static_cast<T>(static_cast<double>(p[j]) - update);
    }
  }
}

template void adam_step(std::span<Tensor<float>>, AdamState<float>&, double, const AdamHyper&);
template void adam_step(std::span<Tensor<double>>, AdamState<double>&, double, const AdamHyper&);

TrainResult train(RIDNet& net, const std::vector<ImageBuffer>& corpus, const TrainConfig& config, TrainState& state,
                  const TrainCallbacks& callbacks) {
  config.validate();
  if (corpus.empty()) fail(Errc::io, "training corpus is empty");
  if (corpus.front().channels != net.config().in_channels) {
    fail(Errc::config, "corpus has " + std::to_string(corpus.front().channels) + " channels, network expects " +
                           std::to_string(net.config().in_channels));
  }
  auto named = net.parameters();
  std::vector<Tensor<float>> params;
  params.reserve(named.size());
  for (auto& p : named) params.push_back(p.tensor);

  TrainResult result;
  if (state.next_iter >= config.max_iters) return result;
  BatchProducer producer(corpus, config.batch_config(), config.seed, state.next_iter, config.max_iters);
  for (std::int64_t it = state.next_iter; it < config.max_iters; ++it) {
    PatchBatch batch = producer.next();
    const double lr = lr_schedule(it, config.lr0, config.lr_halving_interval);
    net.zero_grad();
    Tensor<float> loss = l1_loss(net.forward(batch.noisy), batch.clean);
    const double value = loss.item();
    if (!std::isfinite(value)) {
      fail(Errc::numeric, "non-finite loss at iteration " + std::to_string(it) + " (batch seed " +
                              std::to_string(batch_seed(config.seed, it)) + ")");
    }
    loss.backward();
    adam_step(std::span<Tensor<float>>(params), state.adam, lr, config.adam);
    state.next_iter = it + 1;

    const LossRecord record{it, value, lr};
    result.log.push_back(record);
    if (callbacks.on_iteration) callbacks.on_iteration(record);
    if (callbacks.on_checkpoint && (state.next_iter % config.checkpoint_every == 0 || state.next_iter == config.max_iters)) {
      callbacks.on_checkpoint(state.next_iter, net, state);
    }
  }
  return result;
}

std::vector<CheckpointRecord> training_state_records(RIDNet& net, const TrainState& state) {
  std::vector<CheckpointRecord> out;
  out.push_back(CheckpointRecord::from_int("train.next_iter", state.next_iter));
  out.push_back(CheckpointRecord::from_int("adam.step", state.adam.step));
  if (state.adam.m.empty()) return out;
  auto named = net.parameters();
  if (named.size() != state.adam.m.size()) fail(Errc::shape_mismatch, "optimizer state does not match the network");
  for (std::size_t i = 0; i < named.size(); ++i) {
    out.push_back(CheckpointRecord::from_floats("adam.m." + named[i].name, named[i].tensor.shape(), state.adam.m[i]));
    out.push_back(CheckpointRecord::from_floats("adam.v." + named[i].name, named[i].tensor.shape(), state.adam.v[i]));
  }
  return out;
}

TrainState training_state_from(const LoadedCheckpoint& checkpoint) {
  TrainState state;
  if (const auto* r = checkpoint.find("train.next_iter"); r != nullptr && r->dtype == DType::i64) {
    state.next_iter = r->i64.at(0);
  }
  if (const auto* r = checkpoint.find("adam.step"); r != nullptr && r->dtype == DType::i64) {
    state.adam.step = r->i64.at(0);
  }
  RIDNet alias = checkpoint.net;
  auto named = alias.parameters();
  bool any = false;
  for (const auto& p : named) any = any || checkpoint.find("adam.m." + p.name) != nullptr;
  if (!any) return state;
  for (const auto& p : named) {
    const auto* m = checkpoint.find("adam.m." + p.name);
    const auto* v = checkpoint.find("adam.v." + p.name);
    if (m == nullptr || v == nullptr || m->shape != p.tensor.shape() || v->shape != p.tensor.shape()) {
      fail(Errc::checkpoint_shape, "checkpoint: optimizer moments for '" + p.name + "' are missing or misshapen");
    }
    state.adam.m.push_back(m->f32);
    state.adam.v.push_back(v->f32);
  }
  return state;
}

void write_loss_log(const std::filesystem::path& path, const std::vector<LossRecord>& log, bool append) {
  const bool header = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open loss log '" + path.string() + "'");
  if (header) out << "iter,loss,lr\n";
  char line[128];
  for (const auto& r : log) {
    std::snprintf(line, sizeof line, "%lld,%.17g,%.17g\n", static_cast<long long>(r.iter), r.loss, r.lr);
    out << line;
  }
  if (!out) fail(Errc::io, "failed writing loss log '" + path.string() + "'");
}

ImageBuffer denoise(const RIDNet& net, const ImageBuffer& noisy) {
  if (noisy.channels != net.config().in_channels) {
    fail(Errc::shape_mismatch, "image has " + std::to_string(noisy.channels) + " channels, checkpoint expects " +
                                   std::to_string(net.config().in_channels));
  }
  NoGradGuard no_grad;
  return clipped(tensor_to_image(net.forward(image_to_tensor(noisy))));
}

}  // namespace ridnet
