// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference checks of reverse-mode gradients in double
// precision. The error of a coordinate is
//
//   |analytic - numeric| / max(|analytic|, |numeric|, floor)
//
// Coordinates whose +/- probe lands on a different side of a relu,
// soft-shrink or l1 kink than the unperturbed point are skipped and counted.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ridnet/tensor.hpp"

namespace ridnet {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  int seeds = 10;
  double step = 1e-5;
  double tolerance = 1e-4;
  double floor = 1e-8;
  // Coordinates probed per tensor of the end-to-end net; op and layer cases
  // probe every coordinate.
  std::size_t net_probes = 6;
};

struct GradcheckResult {
  std::string name;
  double max_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double tolerance = 1e-4;

  bool passed() const { return checked > 0 && max_error < tolerance; }
  void merge(const GradcheckResult& other);
};

// `loss` must return a scalar built from `inputs` (which it may capture).
// probes == 0 checks every coordinate, otherwise that many random ones per
// input.
GradcheckResult check_gradients(const std::string& name, const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>> inputs, const GradcheckOptions& options,
                                std::size_t probes, std::mt19937_64& rng);

// Every differentiable op, the layers, and a 2-EAM / 8-channel network, each
// over options.seeds random draws. One result per case.
std::vector<GradcheckResult> run_gradcheck_suite(const GradcheckOptions& options);

}  // namespace ridnet
