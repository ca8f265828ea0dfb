// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ridnet {

ImageBuffer procedural_image(const ProceduralSpec& spec, std::uint64_t seed) {
  if (!(spec.low >= 0.0f && spec.high <= 1.0f && spec.low < spec.high)) {
    fail(Errc::invalid_argument, "procedural_image: need 0 <= low < high <= 1");
  }
  ImageBuffer img(spec.channels, spec.height, spec.width);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = spec.height;
  const double w = spec.width;

  for (int c = 0; c < spec.channels; ++c) {
    const double gx = unit(rng) - 0.5;
    const double gy = unit(rng) - 0.5;
    const double base = 0.3 + 0.4 * unit(rng);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) img.at(c, y, x) = static_cast<float>(base + 0.4 * (gx * x / w + gy * y / h));
    }
  }

  for (int s = 0; s < spec.shapes; ++s) {
    const int kind = static_cast<int>(unit(rng) * 3.0);
    const double cy = unit(rng) * h;
    const double cx = unit(rng) * w;
    const double ry = (0.05 + 0.2 * unit(rng)) * h;
    const double rx = (0.05 + 0.2 * unit(rng)) * w;
    const double shade = unit(rng) - 0.5;
    std::vector<double> level(spec.channels);
    for (auto& l : level) l = unit(rng);
    for (int y = std::max(0, static_cast<int>(cy - ry)); y < std::min(spec.height, static_cast<int>(cy + ry) + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx - rx)); x < std::min(spec.width, static_cast<int>(cx + rx) + 1);
           ++x) {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        const bool inside = kind == 0 ? std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0
                                      : kind == 1 ? dy * dy + dx * dx <= 1.0 : std::abs(dy) + std::abs(dx) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < spec.channels; ++c) img.at(c, y, x) = static_cast<float>(level[c] + 0.3 * shade * dx);
      }
    }
  }

  const double freq = 0.05 + 0.15 * unit(rng);
  const double angle = unit(rng) * std::numbers::pi;
  const double ux = std::cos(angle) * freq;
  const double uy = std::sin(angle) * freq;
  for (int c = 0; c < spec.channels; ++c) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double v = img.at(c, y, x) + 0.04 * std::sin(2.0 * std::numbers::pi * (ux * x + uy * y));
        const double mapped = spec.low + (spec.high - spec.low) * std::clamp(v, 0.0, 1.0);
        img.at(c, y, x) = static_cast<float>(std::nearbyint(mapped * 255.0)) / 255.0f;
      }
    }
  }
  return img;
}

}  // namespace ridnet
