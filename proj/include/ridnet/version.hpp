// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace ridnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ridnet
