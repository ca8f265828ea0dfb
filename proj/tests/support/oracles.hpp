// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain loop oracles shared by the unit and acceptance tests. They depend on
// nothing in the library beyond the container types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ridnet/image.hpp"

namespace ridnet::testing {

// Seven nested loops over n, o, y, x, c, ky, kx.
inline std::vector<double> naive_conv(const std::vector<double>& in, int n, int c, int h, int w,
                                      const std::vector<double>& weight, int out_ch, int k, const std::vector<double>& bias,
                                      int dilation, int padding) {
  const int ho = h + 2 * padding - dilation * (k - 1);
  const int wo = w + 2 * padding - dilation * (k - 1);
  std::vector<double> out(static_cast<std::size_t>(n) * out_ch * ho * wo, 0.0);
  for (int b = 0; b < n; ++b)
    for (int o = 0; o < out_ch; ++o)
      for (int y = 0; y < ho; ++y)
        for (int x = 0; x < wo; ++x) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (int ci = 0; ci < c; ++ci)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = y + ky * dilation - padding;
                const int ix = x + kx * dilation - padding;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += weight[((o * c + ci) * k + ky) * k + kx] * in[((b * c + ci) * h + iy) * w + ix];
              }
          out[((b * out_ch + o) * ho + y) * wo + x] = acc;
        }
  return out;
}

inline double loop_mse(const ImageBuffer& a, const ImageBuffer& b) {
  double acc = 0.0;
  for (int c = 0; c < a.channels; ++c)
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) {
        const double d = double(a.at(c, y, x)) - double(b.at(c, y, x));
        acc += d * d;
      }
  return acc / (double(a.channels) * a.height * a.width);
}

inline double loop_psnr(const ImageBuffer& a, const ImageBuffer& b) {
  const double m = loop_mse(a, b);
  if (m == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / m));
}

// SSIM from the definition: for every window position, weighted moments over
// the full 11x11 Gaussian window (no separable pass), then the mean over
// positions and channels.
inline double loop_ssim(const ImageBuffer& a, const ImageBuffer& b) {
  constexpr int r = 5;
  double g[11];
  double total = 0.0;
  for (int i = 0; i < 11; ++i) {
    g[i] = std::exp(-double((i - r) * (i - r)) / (2.0 * 1.5 * 1.5));
    total += g[i];
  }
  for (double& v : g) v /= total;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double sum = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    double chan = 0.0;
    int count = 0;
    for (int y = r; y < a.height - r; ++y)
      for (int x = r; x < a.width - r; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const double wgt = g[dy + r] * g[dx + r];
            const double va = a.at(c, y + dy, x + dx);
            const double vb = b.at(c, y + dy, x + dx);
            ma += wgt * va;
            mb += wgt * vb;
            saa += wgt * va * va;
            sbb += wgt * vb * vb;
            sab += wgt * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        chan += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    sum += chan / count;
  }
  return sum / a.channels;
}

}  // namespace ridnet::testing
