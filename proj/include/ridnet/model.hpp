// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// The full denoiser: a head conv extracting features, a cascade of
// enhancement attention modules (merge-and-run unit, residual block,
// enhanced residual block, feature attention), a tail conv, and a global
// input skip so the network body predicts the negative noise.
//
//   f0  = head(x)
//   fm  = EAM_m(f_{m-1})                  (+ f_{m-1} with short skips)
//   fg  = fM + f0                         (long skip; fM alone without it)
//   y^  = x + tail(fg)

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ridnet/layers.hpp"

namespace ridnet {

// Which connections are present. The global input skip is always present.
struct Ablation {
  bool lsc = true;  // long skip from f0 to the end of the EAM cascade
  bool ssc = true;  // skip around each EAM
  bool lc = true;   // identity skips inside the residual and enhanced residual blocks
  bool fa = true;   // feature attention at the end of each EAM

  static Ablation all() { return {}; }
  static Ablation none() { return {false, false, false, false}; }
  // The nine flag combinations compared in the skip/attention ablation, in
  // column order: none, LSC, SSC, LSC+SSC, FA, LC+FA, SSC+LC+FA, LSC+SSC+FA, all.
  static std::array<Ablation, 9> study_rows();
  // "lsc+ssc+fa", "none" or "all".
  std::string label() const;
  // Accepts "none", "all", or a '+'-separated subset of lsc/ssc/lc/fa.
  static Ablation parse(const std::string& text);

  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct NetworkConfig {
  int num_eams = 4;
  int channels = 64;
  int attention_reduction = 16;
  int in_channels = 1;
  std::array<int, 2> dilations_a{1, 2};
  std::array<int, 2> dilations_b{3, 4};
  double lambda = 0.5;  // soft-shrink threshold inside the attention gate
  Ablation ablation;

  // Throws Errc::config on inconsistent values.
  void validate() const;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

template <typename T>
struct EnhancementAttentionModule {
  MergeRunUnit<T> merge_run;
  ResidualBlock<T> residual;
  EnhancedResidualBlock<T> enhanced;
  FeatureAttention<T> attention;  // undefined parameters when attention is ablated

  std::size_t parameter_count(bool with_attention) const;
  void visit(const std::string& prefix, bool with_attention, const ParameterVisitor<T>& fn);
};

template <typename T>
struct ForwardOptions {
  GateOptions<T> gates;
};

template <typename T>
Tensor<T> eam_forward(const Tensor<T>& features, const EnhancementAttentionModule<T>& eam, const Ablation& ablation,
                      const ForwardOptions<T>& options = {});

template <typename T>
class BasicRIDNet {
 public:
  struct NamedParameter {
    std::string name;
    Tensor<T> tensor;
  };

  BasicRIDNet() = default;

  // All parameters zero. The forward pass is then the identity.
  static BasicRIDNet zeros(const NetworkConfig& config);
  // Fan-in scaled uniform weights, zero biases, deterministic in `seed`.
  static BasicRIDNet initialized(const NetworkConfig& config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }

  // x: N x in_channels x H x W. Output has the same shape.
  Tensor<T> forward(const Tensor<T>& x, const ForwardOptions<T>& options = {}) const;

  // Parameters in a fixed order with stable dotted names; handles alias the
  // network's storage.
  std::vector<NamedParameter> parameters();
  std::size_t parameter_count() const;
  void zero_grad();

  BasicRIDNet clone() const;
  template <typename U>
  BasicRIDNet<U> cast() const;

  ConvParams<T>& head() { return head_; }
  const ConvParams<T>& head() const { return head_; }
  ConvParams<T>& tail() { return tail_; }
  const ConvParams<T>& tail() const { return tail_; }
  std::vector<EnhancementAttentionModule<T>>& eams() { return eams_; }
  const std::vector<EnhancementAttentionModule<T>>& eams() const { return eams_; }

 private:
  template <typename U>
  friend class BasicRIDNet;

  void visit(const ParameterVisitor<T>& fn);

  NetworkConfig config_;
  ConvParams<T> head_;
  std::vector<EnhancementAttentionModule<T>> eams_;
  ConvParams<T> tail_;
};

using RIDNet = BasicRIDNet<float>;

template <typename T>
Tensor<T> ridnet_forward(const Tensor<T>& x, const BasicRIDNet<T>& net, const ForwardOptions<T>& options = {}) {
  return net.forward(x, options);
}

template <typename T>
template <typename U>
BasicRIDNet<U> BasicRIDNet<T>::cast() const {
  BasicRIDNet<U> out;
  out.config_ = config_;
  out.head_ = head_.template cast<U>();
  out.tail_ = tail_.template cast<U>();
  for (const auto& eam : eams_) {
    EnhancementAttentionModule<U> e{eam.merge_run.template cast<U>(), eam.residual.template cast<U>(),
                                    eam.enhanced.template cast<U>(), {}};
    if (config_.ablation.fa) e.attention = eam.attention.template cast<U>();
    out.eams_.push_back(std::move(e));
  }
  return out;
}

}  // namespace ridnet
