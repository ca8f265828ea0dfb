// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/parallel.hpp"

#include <cstdlib>
#include <string>

#include "ridnet/error.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ridnet {

int num_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_num_threads(int n) {
  if (n < 1) fail(Errc::config, "thread count must be >= 1, got " + std::to_string(n));
#if defined(_OPENMP)
  omp_set_num_threads(n);
#endif
}

int configure_threads_from_env() {
  const char* env = std::getenv("RIDNET_THREADS");
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      fail(Errc::config, std::string("RIDNET_THREADS must be a positive integer, got '") + env + "'");
    }
    set_num_threads(static_cast<int>(n));
  }
  return num_threads();
}

}  // namespace ridnet
