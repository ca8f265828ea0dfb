// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/layers.hpp"

#include <cmath>

#include "ridnet/ops.hpp"

namespace ridnet {

template <typename T>
ConvParams<T> ConvParams<T>::zeros(int in_channels, int out_channels, int kernel, int dilation) {
  if (in_channels < 1 || out_channels < 1) fail(Errc::invalid_argument, "conv layer needs positive channel counts");
  if (kernel < 1 || kernel % 2 == 0) fail(Errc::invalid_argument, "conv layer kernel must be odd");
  if (dilation < 1) fail(Errc::invalid_argument, "conv layer dilation must be >= 1");
  ConvParams p;
  const auto o = static_cast<std::size_t>(out_channels);
  const auto c = static_cast<std::size_t>(in_channels);
  const auto k = static_cast<std::size_t>(kernel);
  p.weight = Tensor<T>({o, c, k, k}, true);
  p.bias = Tensor<T>({o}, true);
  p.dilation = dilation;
  return p;
}

template <typename T>
void ConvParams<T>::visit(const std::string& prefix, const ParameterVisitor<T>& fn) {
  fn(prefix + ".weight", weight);
  fn(prefix + ".bias", bias);
}

template <typename T>
ConvParams<T> ConvParams<T>::clone() const {
  ConvParams p;
  p.weight = Tensor<T>(weight.shape(), std::vector<T>(weight.data().begin(), weight.data().end()), weight.requires_grad());
  p.bias = Tensor<T>(bias.shape(), std::vector<T>(bias.data().begin(), bias.data().end()), bias.requires_grad());
  p.dilation = dilation;
  return p;
}

template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, const ConvParams<T>& conv) {
  return conv2d(x, conv.weight, conv.bias, conv.dilation, conv.padding());
}

template <typename T>
FeatureAttention<T> FeatureAttention<T>::zeros(int channels, int reduction, T lambda) {
  if (reduction < 1 || channels % reduction != 0) {
    fail(Errc::invalid_argument, "feature attention: " + std::to_string(channels) +
                                     " channels are not divisible by reduction " + std::to_string(reduction));
  }
  FeatureAttention fa;
  fa.down = ConvParams<T>::zeros(channels, channels / reduction, 1);
  fa.up = ConvParams<T>::zeros(channels / reduction, channels, 1);
  fa.lambda = lambda;
  fa.reduction = reduction;
  return fa;
}

template <typename T>
void FeatureAttention<T>::visit(const std::string& prefix, const ParameterVisitor<T>& fn) {
  down.visit(prefix + ".down", fn);
  up.visit(prefix + ".up", fn);
}

template <typename T>
FeatureAttention<T> FeatureAttention<T>::clone() const {
  return {down.clone(), up.clone(), lambda, reduction};
}

template <typename T>
Tensor<T> feature_attention_forward(const Tensor<T>& features, const FeatureAttention<T>& fa,
                                    const GateOptions<T>& options) {
  if (features.rank() != 4 || static_cast<int>(features.dim(1)) != fa.channels()) {
    fail(Errc::shape_mismatch, "feature attention expects " + std::to_string(fa.channels()) + " channels, got " +
                                   shape_string(features.shape()));
  }
  if (fa.reduction < 1 || fa.channels() % fa.reduction != 0) {
    fail(Errc::invalid_argument, "feature attention: channel count not divisible by reduction");
  }
  const Tensor<T> pooled = global_avg_pool(features);
  const Tensor<T> squeezed = soft_shrink(conv_forward(pooled, fa.down), fa.lambda);
  Tensor<T> gate = sigmoid(conv_forward(squeezed, fa.up));
  if (options.record != nullptr) options.record->push_back(gate);
  if (options.force_unit_gate) gate = Tensor<T>::full(gate.shape(), T(1));
  return mul_broadcast(features, gate);
}

template <typename T>
ResidualBlock<T> ResidualBlock<T>::zeros(int channels) {
  return {ConvParams<T>::zeros(channels, channels, 3), ConvParams<T>::zeros(channels, channels, 3)};
}

template <typename T>
void ResidualBlock<T>::visit(const std::string& prefix, const ParameterVisitor<T>& fn) {
  conv1.visit(prefix + ".conv1", fn);
  conv2.visit(prefix + ".conv2", fn);
}

template <typename T>
ResidualBlock<T> ResidualBlock<T>::clone() const {
  return {conv1.clone(), conv2.clone()};
}

template <typename T>
EnhancedResidualBlock<T> EnhancedResidualBlock<T>::zeros(int channels) {
  return {ConvParams<T>::zeros(channels, channels, 3), ConvParams<T>::zeros(channels, channels, 3),
          ConvParams<T>::zeros(channels, channels, 1)};
}

template <typename T>
void EnhancedResidualBlock<T>::visit(const std::string& prefix, const ParameterVisitor<T>& fn) {
  conv1.visit(prefix + ".conv1", fn);
  conv2.visit(prefix + ".conv2", fn);
  conv3.visit(prefix + ".conv3", fn);
}

template <typename T>
EnhancedResidualBlock<T> EnhancedResidualBlock<T>::clone() const {
  return {conv1.clone(), conv2.clone(), conv3.clone()};
}

template <typename T>
MergeRunUnit<T> MergeRunUnit<T>::zeros(int channels, std::array<int, 2> dilations_a, std::array<int, 2> dilations_b) {
  MergeRunUnit u;
  for (std::size_t i = 0; i < 2; ++i) {
    u.branch_a[i] = ConvParams<T>::zeros(channels, channels, 3, dilations_a[i]);
    u.branch_b[i] = ConvParams<T>::zeros(channels, channels, 3, dilations_b[i]);
  }
  u.merge = ConvParams<T>::zeros(2 * channels, channels, 3);
  return u;
}

template <typename T>
std::size_t MergeRunUnit<T>::parameter_count() const {
  return branch_a[0].parameter_count() + branch_a[1].parameter_count() + branch_b[0].parameter_count() +
         branch_b[1].parameter_count() + merge.parameter_count();
}

template <typename T>
void MergeRunUnit<T>::visit(const std::string& prefix, const ParameterVisitor<T>& fn) {
  branch_a[0].visit(prefix + ".a0", fn);
  branch_a[1].visit(prefix + ".a1", fn);
  branch_b[0].visit(prefix + ".b0", fn);
  branch_b[1].visit(prefix + ".b1", fn);
  merge.visit(prefix + ".merge", fn);
}

template <typename T>
MergeRunUnit<T> MergeRunUnit<T>::clone() const {
  return {{branch_a[0].clone(), branch_a[1].clone()}, {branch_b[0].clone(), branch_b[1].clone()}, merge.clone()};
}

template <typename T>
Tensor<T> merge_and_run_forward(const Tensor<T>& features, const MergeRunUnit<T>& unit) {
  const Tensor<T> a = relu(conv_forward(relu(conv_forward(features, unit.branch_a[0])), unit.branch_a[1]));
  const Tensor<T> b = relu(conv_forward(relu(conv_forward(features, unit.branch_b[0])), unit.branch_b[1]));
  return relu(conv_forward(concat_channels(a, b), unit.merge));
}

template <typename T>
Tensor<T> residual_block_forward(const Tensor<T>& features, const ResidualBlock<T>& block, bool local_skip) {
  Tensor<T> body = conv_forward(relu(conv_forward(features, block.conv1)), block.conv2);
  return local_skip ? add(features, body) : body;
}

template <typename T>
Tensor<T> erb_forward(const Tensor<T>& features, const EnhancedResidualBlock<T>& block, bool local_skip) {
  Tensor<T> body =
      conv_forward(relu(conv_forward(relu(conv_forward(features, block.conv1)), block.conv2)), block.conv3);
  return local_skip ? add(features, body) : body;
}

template <typename T>
void init_conv(ConvParams<T>& conv, std::mt19937_64& rng) {
  const auto fan_in = static_cast<double>(conv.weight.dim(1) * conv.weight.dim(2) * conv.weight.dim(3));
  const double bound = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T& w : conv.weight.mutable_data()) w = static_cast<T>(dist(rng));
  for (T& b : conv.bias.mutable_data()) b = T(0);
}

#define RIDNET_INSTANTIATE_LAYERS(T)                                                                      \
  template struct ConvParams<T>;                                                                         \
  template struct FeatureAttention<T>;                                                                   \
  template struct ResidualBlock<T>;                                                                      \
  template struct EnhancedResidualBlock<T>;                                                              \
  template struct MergeRunUnit<T>;                                                                       \
  template Tensor<T> conv_forward(const Tensor<T>&, const ConvParams<T>&);                               \
  template Tensor<T> feature_attention_forward(const Tensor<T>&, const FeatureAttention<T>&,             \
                                               const GateOptions<T>&);                                   \
  template Tensor<T> merge_and_run_forward(const Tensor<T>&, const MergeRunUnit<T>&);                    \
  template Tensor<T> residual_block_forward(const Tensor<T>&, const ResidualBlock<T>&, bool);            \
  template Tensor<T> erb_forward(const Tensor<T>&, const EnhancedResidualBlock<T>&, bool);               \
  template void init_conv(ConvParams<T>&, std::mt19937_64&);

RIDNET_INSTANTIATE_LAYERS(float)
RIDNET_INSTANTIATE_LAYERS(double)

#undef RIDNET_INSTANTIATE_LAYERS

}  // namespace ridnet
