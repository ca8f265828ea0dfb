// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ridnet {

/// Error categories. The CLI maps each category onto a distinct exit code.
enum class Errc {
  invalid_argument,  // bad op arguments (negative lambda, bad dilation, ...)
  shape_mismatch,
  graph_state,       // backward misuse
  config,            // bad key=value config or flag combination
  io,                // unreadable / unwritable files, malformed images
  numeric,           // NaN/Inf, failed gradient check
  checkpoint_magic,
  checkpoint_version,
  checkpoint_crc,
  checkpoint_shape,
  checkpoint_truncated,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ridnet
