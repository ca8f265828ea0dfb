// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable operators. Feature maps are NCHW; every op validates shapes
// and throws ridnet::Error(Errc::shape_mismatch / invalid_argument).

#pragma once

#include "ridnet/tensor.hpp"

namespace ridnet {

// Zero-padded 2-D convolution, NCHW input, OxCxkxk weight, O bias.
// Output spatial size is H + 2*padding - dilation*(k-1); padding equal to
// dilation*(k-1)/2 keeps it at H x W.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int dilation,
                 int padding);

// NxCxHxW -> NxCx1x1 spatial mean.
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input);

// sign(v) * max(|v| - lambda, 0)
template <typename T>
Tensor<T> soft_shrink(const Tensor<T>& input, T lambda);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise product of equal shapes.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

// a: NxCxHxW, gate: NxCx1x1; each channel map of `a` is scaled by its gate.
template <typename T>
Tensor<T> mul_broadcast(const Tensor<T>& a, const Tensor<T>& gate);

// NxC1xHxW ++ NxC2xHxW -> Nx(C1+C2)xHxW
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

// Scalar sum of all elements, shape {1}.
template <typename T>
Tensor<T> sum(const Tensor<T>& input);

// Mean absolute difference over every element, shape {1}. The subgradient
// at an exact tie is 0.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target);

// Tracks whether any non-smooth op (relu, soft_shrink, l1) evaluated an input
// on a different side of its kink than a recorded baseline. Finite-difference
// checks use it to discard coordinates where the probe straddles a kink.
class KinkMonitor {
 public:
  KinkMonitor();
  ~KinkMonitor();
  KinkMonitor(const KinkMonitor&) = delete;
  KinkMonitor& operator=(const KinkMonitor&) = delete;

  // Starts a fresh signature; the ops append one region id per element.
  void begin();
  const std::vector<unsigned char>& signature() const { return signature_; }

  static KinkMonitor* active();
  void record(unsigned char region) { signature_.push_back(region); }

 private:
  std::vector<unsigned char> signature_;
  KinkMonitor* previous_;
};

}  // namespace ridnet
