// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ridnet::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,       // unparsable command line
  kConfig = 2,      // bad config file, flag values, or run setup
  kIo = 3,          // unreadable or unwritable files
  kNumeric = 4,     // non-finite values, failed gradient check
  kCheckpoint = 5,  // corrupt or incompatible checkpoint
  kArgument = 6,    // shape or argument mismatch between inputs
  kInternal = 70,
};

// argv[0] is the program name, argv[1] the verb.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace ridnet::cli
