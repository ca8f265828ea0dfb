// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Image quality metrics on float images in [0, 1].

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ridnet/image.hpp"

namespace ridnet {

// Reported when the two images are identical.
inline constexpr double kPsnrCap = 99.0;

// Mean squared error over every channel and pixel, accumulated in double.
double mse(const ImageBuffer& a, const ImageBuffer& b);

// 10 log10(peak^2 / mse), capped at kPsnrCap.
double psnr(const ImageBuffer& a, const ImageBuffer& b, double peak = 1.0);

// Gaussian-windowed SSIM: 11x11 window with sigma 1.5, K1 = 0.01, K2 = 0.03,
// dynamic range 1. The SSIM map covers only positions where the window fits
// entirely inside the image; its mean is averaged over channels. Both sides
// must be at least 11 pixels.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

struct MetricEntry {
  std::string image;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<MetricEntry> entries;

  void add(std::string image, const ImageBuffer& estimate, const ImageBuffer& reference);
  double mean_psnr() const;
  double mean_ssim() const;

  // "image,psnr,ssim", one row per entry, then a "mean" row.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  std::string summary() const;
};

}  // namespace ridnet
