// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Procedural clean images for corpora when no photographs are at hand:
// a smooth background with overlapping flat and shaded shapes plus a faint
// oriented texture. Values lie on the 8-bit grid, so a NetPBM round trip is
// lossless.

#pragma once

#include <cstdint>

#include "ridnet/image.hpp"

namespace ridnet {

struct ProceduralSpec {
  int channels = 1;
  int height = 256;
  int width = 256;
  // Output range. A margin away from 0 and 1 keeps AWGN clipping rare.
  float low = 0.0f;
  float high = 1.0f;
  int shapes = 12;
};

ImageBuffer procedural_image(const ProceduralSpec& spec, std::uint64_t seed);

}  // namespace ridnet
