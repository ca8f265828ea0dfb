// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Numeric kernels behind the tensor ops. Everything under `kernels` is
// OpenMP-parallel; everything under `kernels::reference` is a plain serial
// loop kept as the test oracle and benchmark baseline.
//
// Matrices are row-major. Parallel kernels split work over disjoint output
// blocks and never reduce across threads, so results are bit-identical for
// any thread count.

#pragma once

#include <cstddef>

namespace ridnet::kernels {

enum class Transpose { no, yes };

// C = beta * C + op(A) * op(B), with op(A) m x k and op(B) k x n.
// beta == 0 overwrites C without reading it.
template <typename T>
void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n, std::size_t k,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
          std::size_t ldc);

// Spatial geometry of one same-batch convolution.
struct ConvGeometry {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::size_t padding = 0;

  std::size_t out_height() const { return height + 2 * padding - dilation * (kernel - 1); }
  std::size_t out_width() const { return width + 2 * padding - dilation * (kernel - 1); }
  std::size_t col_rows() const { return channels * kernel * kernel; }
  std::size_t col_cols() const { return out_height() * out_width(); }
  // A 1x1 kernel without padding needs no patch matrix: the input is one.
  bool is_pointwise() const { return kernel == 1 && padding == 0; }
};

// Unfolds one C x H x W image into a (C*k*k) x (Ho*Wo) patch matrix with
// zero padding.
template <typename T>
void im2col(const T* image, const ConvGeometry& g, T* col);

// Inverse scatter of im2col: accumulates the patch matrix into the image.
template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* image);

// y[i] = x[i] + y[i]
template <typename T>
void axpy(std::size_t n, const T* x, T* y);

namespace reference {

template <typename T>
void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n, std::size_t k,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
          std::size_t ldc);

// Direct nested-loop convolution over a batch:
// out[n][o][y][x] = bias[o] + sum_{c,ky,kx} w[o][c][ky][kx] *
//                   in[n][c][y + ky*d - p][x + kx*d - p]   (zero outside)
// bias may be null.
template <typename T>
void conv2d(const T* input, std::size_t batch, const ConvGeometry& g, const T* weight,
            std::size_t out_channels, const T* bias, T* output);

template <typename T>
void axpy(std::size_t n, const T* x, T* y);

}  // namespace reference

}  // namespace ridnet::kernels
