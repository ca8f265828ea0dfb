// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <type_traits>
#if defined(__AVX512F__)
#include <immintrin.h>
#endif
#include <vector>

namespace ridnet::kernels {

namespace {

template <typename T>
struct Blocking;
template <>
struct Blocking<float> {
  static constexpr std::size_t mr = 8;
  static constexpr std::size_t nr = 32;
};
template <>
struct Blocking<double> {
  static constexpr std::size_t mr = 8;
  static constexpr std::size_t nr = 16;
};

constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 128;
constexpr std::size_t kNc = 4096;

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 16;

template <typename T>
inline T at_a(Transpose t, const T* a, std::size_t lda, std::size_t i, std::size_t p) {
  return t == Transpose::no ? a[i * lda + p] : a[p * lda + i];
}

template <typename T>
inline T at_b(Transpose t, const T* b, std::size_t ldb, std::size_t p, std::size_t j) {
  return t == Transpose::no ? b[p * ldb + j] : b[j * ldb + p];
}

// Packs rows [i0, i0+mc) x cols [p0, p0+kc) of op(A) into MR-row slivers,
// each stored k-major: sliver[p * MR + i].
template <typename T>
void pack_a(Transpose t, const T* a, std::size_t lda, std::size_t i0, std::size_t mc,
            std::size_t p0, std::size_t kc, T* out) {
  constexpr std::size_t mr = Blocking<T>::mr;
  const std::size_t slivers = (mc + mr - 1) / mr;
  for (std::size_t s = 0; s < slivers; ++s) {
    T* dst = out + s * kc * mr;
    const std::size_t rows = std::min(mr, mc - s * mr);
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t i = 0;
      for (; i < rows; ++i) dst[p * mr + i] = at_a(t, a, lda, i0 + s * mr + i, p0 + p);
      for (; i < mr; ++i) dst[p * mr + i] = T(0);
    }
  }
}

// Packs rows [p0, p0+kc) x cols [j0, j0+nc) of op(B) into NR-column
// slivers, each stored k-major: sliver[p * NR + j].
template <typename T>
void pack_b(Transpose t, const T* b, std::size_t ldb, std::size_t p0, std::size_t kc,
            std::size_t j0, std::size_t nc, T* out, bool parallel) {
  constexpr std::size_t nr = Blocking<T>::nr;
  const std::ptrdiff_t slivers = static_cast<std::ptrdiff_t>((nc + nr - 1) / nr);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t s = 0; s < slivers; ++s) {
    T* dst = out + static_cast<std::size_t>(s) * kc * nr;
    const std::size_t cols = std::min(nr, nc - static_cast<std::size_t>(s) * nr);
    const std::size_t jbase = j0 + static_cast<std::size_t>(s) * nr;
    if (t == Transpose::no) {
      for (std::size_t p = 0; p < kc; ++p) {
        const T* src = b + (p0 + p) * ldb + jbase;
        std::size_t j = 0;
        for (; j < cols; ++j) dst[p * nr + j] = src[j];
        for (; j < nr; ++j) dst[p * nr + j] = T(0);
      }
    } else {
      for (std::size_t j = 0; j < nr; ++j) {
        if (j < cols) {
          const T* src = b + (jbase + j) * ldb + p0;
          for (std::size_t p = 0; p < kc; ++p) dst[p * nr + j] = src[p];
        } else {
          for (std::size_t p = 0; p < kc; ++p) dst[p * nr + j] = T(0);
        }
      }
    }
  }
}

template <typename T>
inline void micro_kernel(std::size_t kc, const T* __restrict a, const T* __restrict b,
                         T* __restrict c, std::size_t ldc, std::size_t rows, std::size_t cols) {
  constexpr std::size_t mr = Blocking<T>::mr;
  constexpr std::size_t nr = Blocking<T>::nr;
  T acc[mr][nr] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const T* ap = a + p * mr;
    const T* bp = b + p * nr;
    for (std::size_t i = 0; i < mr; ++i) {
      const T ai = ap[i];
#pragma omp simd
      for (std::size_t j = 0; j < nr; ++j) acc[i][j] += ai * bp[j];
    }
  }
  if (rows == mr && cols == nr) {
    for (std::size_t i = 0; i < mr; ++i) {
      T* ci = c + i * ldc;
#pragma omp simd
      for (std::size_t j = 0; j < nr; ++j) ci[j] += acc[i][j];
    }
  } else {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) c[i * ldc + j] += acc[i][j];
    }
  }
}

#if defined(__AVX512F__)
// Full 8 x 32 float tile: 16 zmm accumulators, two B loads and eight
// broadcasts per k step.
template <>
inline void micro_kernel<float>(std::size_t kc, const float* __restrict a, const float* __restrict b,
                                float* __restrict c, std::size_t ldc, std::size_t rows, std::size_t cols) {
  __m512 acc[8][2];
  for (auto& row : acc) row[0] = row[1] = _mm512_setzero_ps();
  for (std::size_t p = 0; p < kc; ++p) {
    const __m512 b0 = _mm512_loadu_ps(b + p * 32);
    const __m512 b1 = _mm512_loadu_ps(b + p * 32 + 16);
    const float* ap = a + p * 8;
    for (int i = 0; i < 8; ++i) {
      const __m512 ai = _mm512_set1_ps(ap[i]);
      acc[i][0] = _mm512_fmadd_ps(ai, b0, acc[i][0]);
      acc[i][1] = _mm512_fmadd_ps(ai, b1, acc[i][1]);
    }
  }
  if (rows == 8 && cols == 32) {
    for (int i = 0; i < 8; ++i) {
      float* ci = c + i * ldc;
      _mm512_storeu_ps(ci, _mm512_add_ps(_mm512_loadu_ps(ci), acc[i][0]));
      _mm512_storeu_ps(ci + 16, _mm512_add_ps(_mm512_loadu_ps(ci + 16), acc[i][1]));
    }
    return;
  }
  alignas(64) float tile[8][32];
  for (int i = 0; i < 8; ++i) {
    _mm512_store_ps(tile[i], acc[i][0]);
    _mm512_store_ps(tile[i] + 16, acc[i][1]);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) c[i * ldc + j] += tile[i][j];
  }
}
#endif

template <typename T>
struct PackBuffers {
  std::vector<T> a;
  std::vector<T> b;
};

template <typename T>
PackBuffers<T>& pack_buffers() {
  thread_local PackBuffers<T> buffers;
  return buffers;
}

template <typename T>
void scale_c(std::size_t m, std::size_t n, T beta, T* c, std::size_t ldc) {
  if (beta == T(1)) return;
  for (std::size_t i = 0; i < m; ++i) {
    T* row = c + i * ldc;
    if (beta == T(0)) {
      std::fill(row, row + n, T(0));
    } else {
      for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
}

// C += A * B^T with A (m x k) and B (n x k) both row-major: every output is a
// dot product of two contiguous rows. Used for weight gradients, where k is
// the pixel count and m, n are small. Register blocks of 4 x 4 rows with SIMD
// lanes along k; kc-chunking keeps the B panel in cache.
template <typename T>
void gemm_nt_dot(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
                 std::size_t ldb, T* c, std::size_t ldc, bool parallel) {
  constexpr std::size_t bm = 4;
  constexpr std::size_t bn = 4;
  constexpr std::size_t lanes = 64 / sizeof(T);
  constexpr std::size_t chunk = 1024;
  const std::ptrdiff_t col_blocks = static_cast<std::ptrdiff_t>((n + bn - 1) / bn);
  for (std::size_t p0 = 0; p0 < k; p0 += chunk) {
    const std::size_t kc = std::min(chunk, k - p0);
    const std::size_t kv = kc - kc % lanes;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t jb = 0; jb < col_blocks; ++jb) {
      const std::size_t j0 = static_cast<std::size_t>(jb) * bn;
      const std::size_t nj = std::min(bn, n - j0);
      for (std::size_t i0 = 0; i0 < m; i0 += bm) {
        const std::size_t ni = std::min(bm, m - i0);
        const T* ar[bm];
        const T* br[bn];
        // Rows past the edge alias row 0; their sums are discarded.
        for (std::size_t i = 0; i < bm; ++i) ar[i] = a + (i0 + (i < ni ? i : 0)) * lda + p0;
        for (std::size_t j = 0; j < bn; ++j) br[j] = b + (j0 + (j < nj ? j : 0)) * ldb + p0;
        T acc[bm][bn][lanes] = {};
        for (std::size_t p = 0; p < kv; p += lanes) {
          for (std::size_t i = 0; i < bm; ++i) {
            for (std::size_t j = 0; j < bn; ++j) {
#pragma omp simd
              for (std::size_t l = 0; l < lanes; ++l) acc[i][j][l] += ar[i][p + l] * br[j][p + l];
            }
          }
        }
        for (std::size_t i = 0; i < ni; ++i) {
          for (std::size_t j = 0; j < nj; ++j) {
            T sum = T(0);
            for (std::size_t l = 0; l < lanes; ++l) sum += acc[i][j][l];
            for (std::size_t p = kv; p < kc; ++p) sum += ar[i][p] * br[j][p];
            c[(i0 + i) * ldc + j0 + j] += sum;
          }
        }
      }
    }
  }
}

#if defined(__AVX512F__)
// Same tile, with B read in place from a row-major matrix instead of a packed
// sliver. Only full 32-column tiles.
inline void micro_kernel_strided(std::size_t kc, const float* __restrict a, const float* __restrict b,
                                 std::size_t ldb, float* __restrict c, std::size_t ldc, std::size_t rows) {
  __m512 acc[8][2];
  for (auto& row : acc) row[0] = row[1] = _mm512_setzero_ps();
  for (std::size_t p = 0; p < kc; ++p) {
    const __m512 b0 = _mm512_loadu_ps(b + p * ldb);
    const __m512 b1 = _mm512_loadu_ps(b + p * ldb + 16);
    const float* ap = a + p * 8;
    for (int i = 0; i < 8; ++i) {
      const __m512 ai = _mm512_set1_ps(ap[i]);
      acc[i][0] = _mm512_fmadd_ps(ai, b0, acc[i][0]);
      acc[i][1] = _mm512_fmadd_ps(ai, b1, acc[i][1]);
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    float* ci = c + i * ldc;
    _mm512_storeu_ps(ci, _mm512_add_ps(_mm512_loadu_ps(ci), acc[i][0]));
    _mm512_storeu_ps(ci + 16, _mm512_add_ps(_mm512_loadu_ps(ci + 16), acc[i][1]));
  }
}

// Short-m products (conv forward: m = output channels) spend more time
// packing B than multiplying; stream B from memory instead.
inline bool gemm_unpacked_b(Transpose trans_a, std::size_t m, std::size_t n, std::size_t k, const float* a,
                            std::size_t lda, const float* b, std::size_t ldb, float* c, std::size_t ldc,
                            bool parallel) {
  constexpr std::size_t mr = 8;
  constexpr std::size_t nr = 32;
  if (m > 32 || n < nr) return false;
  auto& packed = pack_buffers<float>();
  const std::size_t a_slivers = (m + mr - 1) / mr;
  packed.a.resize(kKc * a_slivers * mr);
  packed.b.resize(kKc * nr);
  const std::size_t full = n / nr;
  for (std::size_t pc = 0; pc < k; pc += kKc) {
    const std::size_t kc = std::min(kKc, k - pc);
    pack_a(trans_a, a, lda, 0, m, pc, kc, packed.a.data());
    const float* pa = packed.a.data();
    const float* bp = b + pc * ldb;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t js = 0; js < static_cast<std::ptrdiff_t>(full); ++js) {
      const std::size_t j = static_cast<std::size_t>(js) * nr;
      for (std::size_t is = 0; is < a_slivers; ++is) {
        micro_kernel_strided(kc, pa + is * mr * kc, bp + j, ldb, c + is * mr * ldc + j, ldc,
                             std::min(mr, m - is * mr));
      }
    }
    if (full * nr < n) {
      const std::size_t j = full * nr;
      pack_b(Transpose::no, b, ldb, pc, kc, j, n - j, packed.b.data(), false);
      for (std::size_t is = 0; is < a_slivers; ++is) {
        micro_kernel(kc, pa + is * mr * kc, packed.b.data(), c + is * mr * ldc + j, ldc, std::min(mr, m - is * mr),
                     n - j);
      }
    }
  }
  return true;
}
#endif

}  // namespace

template <typename T>
void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n, std::size_t k,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
          std::size_t ldc) {
  constexpr std::size_t mr = Blocking<T>::mr;
  constexpr std::size_t nr = Blocking<T>::nr;
  if (m == 0 || n == 0) return;
  scale_c(m, n, beta, c, ldc);
  if (k == 0) return;

  const bool parallel = m * n * k >= kParallelWork;
  if (trans_a == Transpose::no && trans_b == Transpose::yes && k >= 256 && m * n <= 4096) {
    gemm_nt_dot(m, n, k, a, lda, b, ldb, c, ldc, parallel);
    return;
  }
#if defined(__AVX512F__)
  if constexpr (std::is_same_v<T, float>) {
    if (trans_b == Transpose::no && gemm_unpacked_b(trans_a, m, n, k, a, lda, b, ldb, c, ldc, parallel)) return;
  }
#endif
  auto& buffers = pack_buffers<T>();
  buffers.b.resize(kKc * ((std::min(n, kNc) + nr - 1) / nr) * nr);
  buffers.a.resize(kKc * ((std::min(m, kMc) + mr - 1) / mr) * mr);

  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      pack_b(trans_b, b, ldb, pc, kc, jc, nc, buffers.b.data(), parallel);
      for (std::size_t ic = 0; ic < m; ic += kMc) {
        const std::size_t mc = std::min(kMc, m - ic);
        pack_a(trans_a, a, lda, ic, mc, pc, kc, buffers.a.data());

        const T* packed_a = buffers.a.data();
        const T* packed_b = buffers.b.data();
        const std::ptrdiff_t a_slivers = static_cast<std::ptrdiff_t>((mc + mr - 1) / mr);
        const std::ptrdiff_t b_slivers = static_cast<std::ptrdiff_t>((nc + nr - 1) / nr);
#pragma omp parallel for collapse(2) schedule(static) if (parallel)
        for (std::ptrdiff_t js = 0; js < b_slivers; ++js) {
          for (std::ptrdiff_t is = 0; is < a_slivers; ++is) {
            const std::size_t i = static_cast<std::size_t>(is) * mr;
            const std::size_t j = static_cast<std::size_t>(js) * nr;
            micro_kernel(kc, packed_a + i * kc, packed_b + j * kc, c + (ic + i) * ldc + jc + j, ldc,
                         std::min(mr, mc - i), std::min(nr, nc - j));
          }
        }
      }
    }
  }
}

template <typename T>
void im2col(const T* image, const ConvGeometry& g, T* col) {
  const std::size_t ho = g.out_height();
  const std::size_t wo = g.out_width();
  const std::size_t k = g.kernel;
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(g.col_rows());
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
#pragma omp parallel for schedule(static) if (g.col_rows() * ho * wo >= kParallelWork)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const std::size_t ch = static_cast<std::size_t>(r) / (k * k);
    const std::size_t ky = (static_cast<std::size_t>(r) / k) % k;
    const std::size_t kx = static_cast<std::size_t>(r) % k;
    const T* src = image + ch * g.height * g.width;
    T* dst = col + static_cast<std::size_t>(r) * ho * wo;
    const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky * g.dilation) - static_cast<std::ptrdiff_t>(g.padding);
    const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx * g.dilation) - static_cast<std::ptrdiff_t>(g.padding);
    // Output columns whose source x lies inside the image: [x_lo, x_hi).
    const std::ptrdiff_t x_lo = std::clamp<std::ptrdiff_t>(-dx, 0, static_cast<std::ptrdiff_t>(wo));
    const std::ptrdiff_t x_hi = std::clamp<std::ptrdiff_t>(w - dx, x_lo, static_cast<std::ptrdiff_t>(wo));
    for (std::size_t oy = 0; oy < ho; ++oy) {
      T* out = dst + oy * wo;
      const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) + dy;
      if (iy < 0 || iy >= h) {
        std::fill(out, out + wo, T(0));
        continue;
      }
      const T* in = src + iy * w;
      std::fill(out, out + x_lo, T(0));
      for (std::ptrdiff_t ox = x_lo; ox < x_hi; ++ox) out[ox] = in[ox + dx];
      std::fill(out + x_hi, out + wo, T(0));
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* image) {
  const std::size_t ho = g.out_height();
  const std::size_t wo = g.out_width();
  const std::size_t k = g.kernel;
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const std::ptrdiff_t channels = static_cast<std::ptrdiff_t>(g.channels);
#pragma omp parallel for schedule(static) if (g.col_rows() * ho * wo >= kParallelWork)
  for (std::ptrdiff_t ch = 0; ch < channels; ++ch) {
    T* dst = image + static_cast<std::size_t>(ch) * g.height * g.width;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const std::size_t r = (static_cast<std::size_t>(ch) * k + ky) * k + kx;
        const T* src = col + r * ho * wo;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky * g.dilation) - static_cast<std::ptrdiff_t>(g.padding);
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx * g.dilation) - static_cast<std::ptrdiff_t>(g.padding);
        const std::ptrdiff_t x_lo = std::clamp<std::ptrdiff_t>(-dx, 0, static_cast<std::ptrdiff_t>(wo));
        const std::ptrdiff_t x_hi = std::clamp<std::ptrdiff_t>(w - dx, x_lo, static_cast<std::ptrdiff_t>(wo));
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) + dy;
          if (iy < 0 || iy >= h) continue;
          T* row = dst + iy * w;
          const T* in = src + oy * wo;
          for (std::ptrdiff_t ox = x_lo; ox < x_hi; ++ox) row[ox + dx] += in[ox];
        }
      }
    }
  }
}

template <typename T>
void axpy(std::size_t n, const T* x, T* y) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for simd schedule(static) if (n >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < count; ++i) y[i] += x[i];
}

namespace reference {

template <typename T>
void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n, std::size_t k,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
          std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T sum = T(0);
      for (std::size_t p = 0; p < k; ++p) sum += at_a(trans_a, a, lda, i, p) * at_b(trans_b, b, ldb, p, j);
      c[i * ldc + j] = (beta == T(0) ? T(0) : beta * c[i * ldc + j]) + sum;
    }
  }
}

template <typename T>
void conv2d(const T* input, std::size_t batch, const ConvGeometry& g, const T* weight,
            std::size_t out_channels, const T* bias, T* output) {
  const std::size_t ho = g.out_height();
  const std::size_t wo = g.out_width();
  const std::size_t k = g.kernel;
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < out_channels; ++o) {
      for (std::size_t y = 0; y < ho; ++y) {
        for (std::size_t x = 0; x < wo; ++x) {
          T sum = bias != nullptr ? bias[o] : T(0);
          for (std::size_t c = 0; c < g.channels; ++c) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky * g.dilation) -
                                          static_cast<std::ptrdiff_t>(g.padding);
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx * g.dilation) -
                                          static_cast<std::ptrdiff_t>(g.padding);
                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.height) ||
                    ix >= static_cast<std::ptrdiff_t>(g.width)) {
                  continue;
                }
                sum += weight[((o * g.channels + c) * k + ky) * k + kx] *
                       input[((n * g.channels + c) * g.height + static_cast<std::size_t>(iy)) * g.width +
                             static_cast<std::size_t>(ix)];
              }
            }
          }
          output[((n * out_channels + o) * ho + y) * wo + x] = sum;
        }
      }
    }
  }
}

template <typename T>
void axpy(std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

}  // namespace reference

#define RIDNET_INSTANTIATE_KERNELS(T)                                                                \
  template void gemm<T>(Transpose, Transpose, std::size_t, std::size_t, std::size_t, const T*,       \
                        std::size_t, const T*, std::size_t, T, T*, std::size_t);                     \
  template void im2col<T>(const T*, const ConvGeometry&, T*);                                        \
  template void col2im<T>(const T*, const ConvGeometry&, T*);                                        \
  template void axpy<T>(std::size_t, const T*, T*);                                                  \
  template void reference::gemm<T>(Transpose, Transpose, std::size_t, std::size_t, std::size_t,      \
                                   const T*, std::size_t, const T*, std::size_t, T, T*, std::size_t); \
  template void reference::conv2d<T>(const T*, std::size_t, const ConvGeometry&, const T*,           \
                                     std::size_t, const T*, T*);                                     \
  template void reference::axpy<T>(std::size_t, const T*, T*);

RIDNET_INSTANTIATE_KERNELS(float)
RIDNET_INSTANTIATE_KERNELS(double)

#undef RIDNET_INSTANTIATE_KERNELS

}  // namespace ridnet::kernels
