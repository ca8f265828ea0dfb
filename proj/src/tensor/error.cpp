// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/error.hpp"

namespace ridnet {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::graph_state: return "graph_state";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::numeric: return "numeric";
    case Errc::checkpoint_magic: return "checkpoint_magic";
    case Errc::checkpoint_version: return "checkpoint_version";
    case Errc::checkpoint_crc: return "checkpoint_crc";
    case Errc::checkpoint_shape: return "checkpoint_shape";
    case Errc::checkpoint_truncated: return "checkpoint_truncated";
  }
  return "unknown";
}

}  // namespace ridnet
