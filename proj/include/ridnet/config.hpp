// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration.
//
//   # comment to end of line
//   key = value
//
// Blank lines are ignored. Keys may appear at most once; unknown keys are
// errors. Booleans accept true/false/1/0; pairs are "a,b".
//
//   network:  num_eams channels reduction in_channels dilations_a dilations_b
//             lambda lsc ssc lc fa
//   training: lr lr_halving_interval batch patch sigma sigma_max max_iters
//             seed adam_beta1 adam_beta2 adam_eps checkpoint_every

#pragma once

#include <filesystem>
#include <string>

#include "ridnet/model.hpp"
#include "ridnet/train.hpp"

namespace ridnet {

struct RunConfig {
  NetworkConfig network;
  TrainConfig train;

  void validate() const;
  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

// Throws Errc::config with the offending line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Every key, one per line, in a form parse_config reads back exactly.
std::string format_config(const RunConfig& config);

}  // namespace ridnet
