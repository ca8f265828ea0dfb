// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace ridnet {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(Errc::shape_mismatch, std::string(what) + ": image shapes differ (" + std::to_string(a.channels) + "x" +
                                   std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                                   std::to_string(b.channels) + "x" + std::to_string(b.height) + "x" +
                                   std::to_string(b.width) + ")");
  }
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable valid-mode filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w, const std::array<double, kWindow>& g) {
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * plane[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double mse(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b, double peak) {
  if (!(peak > 0.0)) fail(Errc::invalid_argument, "psnr: peak must be positive");
  const double err = mse(a, b);
  if (err == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / err));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "ssim");
  if (a.height < kWindow || a.width < kWindow) {
    fail(Errc::invalid_argument, "ssim: image " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                                     " is smaller than the 11x11 window");
  }
  static const auto taps = gaussian_taps();
  const int h = a.height;
  const int w = a.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (std::size_t i = 0; i < plane; ++i) {
      x[i] = a.data[c * plane + i];
      y[i] = b.data[c * plane + i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, taps);
    const auto my = filter_valid(y, h, w, taps);
    const auto sxx = filter_valid(xx, h, w, taps);
    const auto syy = filter_valid(yy, h, w, taps);
    const auto sxy = filter_valid(xy, h, w, taps);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      const double num = (2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2);
      const double den = (mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / a.channels;
}

void MetricReport::add(std::string image, const ImageBuffer& estimate, const ImageBuffer& reference) {
  entries.push_back({std::move(image), psnr(estimate, reference), ssim(estimate, reference)});
}

double MetricReport::mean_psnr() const {
  if (entries.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& e : entries) acc += e.psnr;
  return acc / static_cast<double>(entries.size());
}

double MetricReport::mean_ssim() const {
  if (entries.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& e : entries) acc += e.ssim;
  return acc / static_cast<double>(entries.size());
}

std::string MetricReport::to_csv() const {
  std::string out = "image,psnr,ssim\n";
  char line[64];
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, ",%.10f,%.10f\n", e.psnr, e.ssim);
    out += e.image + line;
  }
  std::snprintf(line, sizeof line, ",%.10f,%.10f\n", mean_psnr(), mean_ssim());
  out += std::string("mean") + line;
  return out;
}

void MetricReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open report '" + path.string() + "'");
  out << to_csv();
  if (!out) fail(Errc::io, "failed writing report '" + path.string() + "'");
}

std::string MetricReport::summary() const {
  char line[96];
  std::snprintf(line, sizeof line, "mean PSNR %.2f dB, mean SSIM %.4f over %zu images", mean_psnr(), mean_ssim(),
                entries.size());
  return line;
}

}  // namespace ridnet
