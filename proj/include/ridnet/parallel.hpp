// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace ridnet {

// Thread count used by the OpenMP kernels. Initialised from RIDNET_THREADS
// when set, otherwise from the OpenMP runtime default. Kernels never reduce
// across threads, so results do not depend on this value; RIDNET_THREADS=1 is
// still the documented deterministic mode.
int num_threads();
void set_num_threads(int n);

// Reads RIDNET_THREADS and applies it. Returns the resulting thread count.
int configure_threads_from_env();

}  // namespace ridnet
