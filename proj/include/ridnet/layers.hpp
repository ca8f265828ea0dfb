// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameterised building blocks of the denoiser. Layers are plain parameter
// containers; the *_forward functions are pure given the parameters.
//
// Tensor handles share storage, so copying a layer aliases its parameters.
// Use clone() for an independent copy.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ridnet/tensor.hpp"

namespace ridnet {

template <typename T>
using ParameterVisitor = std::function<void(const std::string& name, Tensor<T>& param)>;

template <typename T>
struct ConvParams {
  Tensor<T> weight;  // out x in x k x k
  Tensor<T> bias;    // out
  int dilation = 1;

  // Zero weights and bias, both requiring grad.
  static ConvParams zeros(int in_channels, int out_channels, int kernel, int dilation = 1);

  int kernel() const { return static_cast<int>(weight.dim(2)); }
  int in_channels() const { return static_cast<int>(weight.dim(1)); }
  int out_channels() const { return static_cast<int>(weight.dim(0)); }
  // Same-size padding for the dilated kernel.
  int padding() const { return dilation * (kernel() - 1) / 2; }
  std::size_t parameter_count() const { return weight.numel() + bias.numel(); }

  void visit(const std::string& prefix, const ParameterVisitor<T>& fn);
  ConvParams clone() const;
  template <typename U>
  ConvParams<U> cast() const {
    return {weight.template cast<U>(), bias.template cast<U>(), dilation};
  }
};

// Same-padded convolution with the layer's dilation.
template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, const ConvParams<T>& conv);

// Channel gating: global average pooling, a 1x1 reduction to c/r channels,
// soft shrinkage, a 1x1 expansion back to c, and a sigmoid whose output
// rescales each input channel.
template <typename T>
struct FeatureAttention {
  ConvParams<T> down;  // c -> c/r, 1x1
  ConvParams<T> up;    // c/r -> c, 1x1
  T lambda = T(0.5);
  int reduction = 16;

  static FeatureAttention zeros(int channels, int reduction, T lambda);
  int channels() const { return down.in_channels(); }
  int bottleneck() const { return down.out_channels(); }
  std::size_t parameter_count() const { return down.parameter_count() + up.parameter_count(); }
  void visit(const std::string& prefix, const ParameterVisitor<T>& fn);
  FeatureAttention clone() const;
  template <typename U>
  FeatureAttention<U> cast() const {
    return {down.template cast<U>(), up.template cast<U>(), static_cast<U>(lambda), reduction};
  }
};

// Hooks into the attention gate used by tests and the acceptance suite.
template <typename T>
struct GateOptions {
  // Replace every gate value by exactly 1.
  bool force_unit_gate = false;
  // When set, every computed gate tensor (N x c x 1 x 1) is appended.
  std::vector<Tensor<T>>* record = nullptr;
};

template <typename T>
Tensor<T> feature_attention_forward(const Tensor<T>& features, const FeatureAttention<T>& fa,
                                    const GateOptions<T>& options = {});

// conv3x3 -> relu -> conv3x3, plus identity.
template <typename T>
struct ResidualBlock {
  ConvParams<T> conv1;
  ConvParams<T> conv2;

  static ResidualBlock zeros(int channels);
  std::size_t parameter_count() const { return conv1.parameter_count() + conv2.parameter_count(); }
  void visit(const std::string& prefix, const ParameterVisitor<T>& fn);
  ResidualBlock clone() const;
  template <typename U>
  ResidualBlock<U> cast() const {
    return {conv1.template cast<U>(), conv2.template cast<U>()};
  }
};

// conv3x3 -> relu -> conv3x3 -> relu -> conv1x1, plus identity.
template <typename T>
struct EnhancedResidualBlock {
  ConvParams<T> conv1;
  ConvParams<T> conv2;
  ConvParams<T> conv3;

  static EnhancedResidualBlock zeros(int channels);
  std::size_t parameter_count() const {
    return conv1.parameter_count() + conv2.parameter_count() + conv3.parameter_count();
  }
  void visit(const std::string& prefix, const ParameterVisitor<T>& fn);
  EnhancedResidualBlock clone() const;
  template <typename U>
  EnhancedResidualBlock<U> cast() const {
    return {conv1.template cast<U>(), conv2.template cast<U>(), conv3.template cast<U>()};
  }
};

// Two dilated branches of two 3x3 convs each, concatenated and fused by a
// 3x3 conv from 2c to c. Every conv is followed by a relu.
template <typename T>
struct MergeRunUnit {
  std::array<ConvParams<T>, 2> branch_a;
  std::array<ConvParams<T>, 2> branch_b;
  ConvParams<T> merge;

  static MergeRunUnit zeros(int channels, std::array<int, 2> dilations_a, std::array<int, 2> dilations_b);
  std::size_t parameter_count() const;
  void visit(const std::string& prefix, const ParameterVisitor<T>& fn);
  MergeRunUnit clone() const;
  template <typename U>
  MergeRunUnit<U> cast() const {
    return {{branch_a[0].template cast<U>(), branch_a[1].template cast<U>()},
            {branch_b[0].template cast<U>(), branch_b[1].template cast<U>()},
            merge.template cast<U>()};
  }
};

template <typename T>
Tensor<T> merge_and_run_forward(const Tensor<T>& features, const MergeRunUnit<T>& unit);

// `local_skip` false drops the identity path (the LC ablation).
template <typename T>
Tensor<T> residual_block_forward(const Tensor<T>& features, const ResidualBlock<T>& block, bool local_skip = true);

template <typename T>
Tensor<T> erb_forward(const Tensor<T>& features, const EnhancedResidualBlock<T>& block, bool local_skip = true);

// Fan-in scaled uniform initialisation of one conv: weights ~ U(-a, a) with
// a = sqrt(6 / fan_in), so Var = 2 / fan_in; biases are zero.
template <typename T>
void init_conv(ConvParams<T>& conv, std::mt19937_64& rng);

}  // namespace ridnet
