// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "ridnet/kernels.hpp"

namespace ridnet {

namespace {

using kernels::ConvGeometry;
using kernels::Transpose;

constexpr std::size_t kParallelElems = std::size_t{1} << 15;

thread_local KinkMonitor* t_kink_monitor = nullptr;

template <typename F>
inline void parallel_for(std::size_t n, F&& body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelElems)
  for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.defined() || !b.defined()) fail(Errc::invalid_argument, std::string(op) + ": undefined operand");
  if (a.shape() != b.shape()) {
    fail(Errc::shape_mismatch,
         std::string(op) + ": shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) + " differ");
  }
}

template <typename T>
void require_rank4(const char* op, const Tensor<T>& t) {
  if (!t.defined() || t.rank() != 4) {
    fail(Errc::shape_mismatch, std::string(op) + ": expected an NCHW tensor, got " +
                                   (t.defined() ? shape_string(t.shape()) : std::string("undefined")));
  }
}

}  // namespace

KinkMonitor::KinkMonitor() : previous_(t_kink_monitor) { t_kink_monitor = this; }
KinkMonitor::~KinkMonitor() { t_kink_monitor = previous_; }
void KinkMonitor::begin() { signature_.clear(); }
KinkMonitor* KinkMonitor::active() { return t_kink_monitor; }

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int dilation,
                 int padding) {
  require_rank4("conv2d", input);
  require_rank4("conv2d weight", weight);
  if (dilation < 1) fail(Errc::invalid_argument, "conv2d: dilation must be positive, got " + std::to_string(dilation));
  if (padding < 0) fail(Errc::invalid_argument, "conv2d: padding must be non-negative, got " + std::to_string(padding));
  const std::size_t k = weight.dim(2);
  if (weight.dim(3) != k || k % 2 == 0) {
    fail(Errc::invalid_argument, "conv2d: kernel must be square with odd size, got " + shape_string(weight.shape()));
  }
  const std::size_t batch = input.dim(0);
  const std::size_t out_ch = weight.dim(0);
  if (weight.dim(1) != input.dim(1)) {
    fail(Errc::shape_mismatch, "conv2d: input has " + std::to_string(input.dim(1)) + " channels, weight expects " +
                                   std::to_string(weight.dim(1)));
  }
  if (!bias.defined() || bias.numel() != out_ch) {
    fail(Errc::shape_mismatch, "conv2d: bias must hold one value per output channel");
  }

  ConvGeometry g;
  g.channels = input.dim(1);
  g.height = input.dim(2);
  g.width = input.dim(3);
  g.kernel = k;
  g.dilation = static_cast<std::size_t>(dilation);
  g.padding = static_cast<std::size_t>(padding);
  const std::size_t reach = g.dilation * (k - 1) + 1;
  if (reach > g.height + 2 * g.padding || reach > g.width + 2 * g.padding) {
    fail(Errc::invalid_argument, "conv2d: dilated kernel spans " + std::to_string(reach) +
                                     " pixels, larger than the padded input " + shape_string(input.shape()));
  }

  const std::size_t ho = g.out_height();
  const std::size_t wo = g.out_width();
  const std::size_t plane = ho * wo;
  const std::size_t krows = g.col_rows();
  const std::size_t col_size = g.is_pointwise() ? 0 : krows * plane;
  std::vector<T> col(col_size);
  std::vector<T> out(batch * out_ch * plane);
  const T* w = weight.data().data();
  const T* b = bias.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    const T* xn = input.data().data() + n * g.channels * g.height * g.width;
    T* yn = out.data() + n * out_ch * plane;
    const T* src = xn;
    if (col_size > 0) {
      kernels::im2col(xn, g, col.data());
      src = col.data();
    }
    kernels::gemm(Transpose::no, Transpose::no, out_ch, plane, krows, w, krows, src, plane, T(0), yn, plane);
    for (std::size_t o = 0; o < out_ch; ++o) {
      T* row = yn + o * plane;
      const T bo = b[o];
#pragma omp simd
      for (std::size_t i = 0; i < plane; ++i) row[i] += bo;
    }
  }

  return make_op_result<T>(
      "conv2d", {batch, out_ch, ho, wo}, std::move(out), {input, weight, bias},
      [g, batch, out_ch](TensorNode<T>& self) {
        const auto& x = self.inputs[0];
        const auto& wt = self.inputs[1];
        const auto& bs = self.inputs[2];
        const std::size_t plane = g.out_height() * g.out_width();
        const std::size_t krows = g.col_rows();
        const std::size_t in_plane = g.channels * g.height * g.width;
        const std::size_t col_size = g.is_pointwise() ? 0 : krows * plane;
        std::vector<T> scratch;
        if (col_size > 0 && wants_grad(wt)) scratch.resize(col_size);

        // dx is the convolution of dy with the kernel flipped in space and
        // transposed in channels, padded by dilation*(k-1) - padding. That
        // keeps the gemm in the fast forward shape; larger paddings scatter
        // W^T dy with col2im instead.
        const std::size_t span = g.dilation * (g.kernel - 1);
        const bool transposed = col_size > 0 && g.padding <= span;
        ConvGeometry gt;
        gt.channels = out_ch;
        gt.height = g.out_height();
        gt.width = g.out_width();
        gt.kernel = g.kernel;
        gt.dilation = g.dilation;
        gt.padding = transposed ? span - g.padding : 0;
        std::vector<T> flipped;
        std::vector<T> dcol;
        if (wants_grad(x) && col_size > 0) {
          if (transposed) {
            const std::size_t kk = g.kernel * g.kernel;
            flipped.resize(g.channels * out_ch * kk);
            for (std::size_t o = 0; o < out_ch; ++o) {
              for (std::size_t c = 0; c < g.channels; ++c) {
                for (std::size_t t = 0; t < kk; ++t) {
                  flipped[(c * out_ch + o) * kk + (kk - 1 - t)] = wt->data[(o * g.channels + c) * kk + t];
                }
              }
            }
            dcol.resize(gt.col_rows() * in_plane / g.channels);
          } else {
            dcol.resize(col_size);
          }
        }

        for (std::size_t n = 0; n < batch; ++n) {
          const T* dy = self.grad.data() + n * out_ch * plane;
          if (wants_grad(bs)) {
            for (std::size_t o = 0; o < out_ch; ++o) {
              T acc = T(0);
              const T* row = dy + o * plane;
#pragma omp simd reduction(+ : acc)
              for (std::size_t i = 0; i < plane; ++i) acc += row[i];
              bs->grad[o] += acc;
            }
          }
          const T* xn = x->data.data() + n * in_plane;
          if (wants_grad(wt)) {
            const T* src = xn;
            if (col_size > 0) {
              kernels::im2col(xn, g, scratch.data());
              src = scratch.data();
            }
            kernels::gemm(Transpose::no, Transpose::yes, out_ch, krows, plane, dy, plane, src, plane, T(1),
                          wt->grad.data(), krows);
          }
          if (wants_grad(x)) {
            T* dx = x->grad.data() + n * in_plane;
            const std::size_t in_hw = g.height * g.width;
            if (col_size == 0) {
              kernels::gemm(Transpose::yes, Transpose::no, krows, plane, out_ch, wt->data.data(), krows, dy, plane,
                            T(1), dx, plane);
            } else if (transposed) {
              kernels::im2col(dy, gt, dcol.data());
              kernels::gemm(Transpose::no, Transpose::no, g.channels, in_hw, gt.col_rows(), flipped.data(),
                            gt.col_rows(), dcol.data(), in_hw, T(1), dx, in_hw);
            } else {
              kernels::gemm(Transpose::yes, Transpose::no, krows, plane, out_ch, wt->data.data(), krows, dy, plane,
                            T(0), dcol.data(), plane);
              kernels::col2im(dcol.data(), g, dx);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
  require_rank4("global_avg_pool", input);
  const std::size_t n = input.dim(0);
  const std::size_t c = input.dim(1);
  const std::size_t plane = input.dim(2) * input.dim(3);
  if (plane == 0) fail(Errc::invalid_argument, "global_avg_pool: empty spatial extent");
  std::vector<T> out(n * c);
  const T* x = input.data().data();
  const T scale = T(1) / static_cast<T>(plane);
  for (std::size_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < plane; ++j) acc += static_cast<double>(x[i * plane + j]);
    out[i] = static_cast<T>(acc / static_cast<double>(plane));
  }
  return make_op_result<T>("global_avg_pool", {n, c, 1, 1}, std::move(out), {input},
                           [plane, scale](TensorNode<T>& self) {
                             auto& x = *self.inputs[0];
                             const std::size_t maps = self.grad.size();
                             parallel_for(maps * plane, [&](std::size_t i) { x.grad[i] += self.grad[i / plane] * scale; });
                           });
}

template <typename T>
Tensor<T> soft_shrink(const Tensor<T>& input, T lambda) {
  if (!(lambda >= T(0))) fail(Errc::invalid_argument, "soft_shrink: lambda must be non-negative");
  const std::size_t n = input.numel();
  std::vector<T> out(n);
  const T* x = input.data().data();
  parallel_for(n, [&](std::size_t i) {
    const T v = x[i];
    out[i] = v > lambda ? v - lambda : (v < -lambda ? v + lambda : T(0));
  });
  if (KinkMonitor* km = KinkMonitor::active()) {
    for (std::size_t i = 0; i < n; ++i) km->record(x[i] > lambda ? 2 : (x[i] < -lambda ? 0 : 1));
  }
  return make_op_result<T>("soft_shrink", input.shape(), std::move(out), {input}, [lambda](TensorNode<T>& self) {
    auto& x = *self.inputs[0];
    parallel_for(self.grad.size(), [&](std::size_t i) {
      if (x.data[i] > lambda || x.data[i] < -lambda) x.grad[i] += self.grad[i];
    });
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input) {
  // Saturated values are kept strictly inside (0, 1).
  constexpr T lo = std::numeric_limits<T>::min();
  constexpr T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
  const std::size_t n = input.numel();
  std::vector<T> out(n);
  const T* x = input.data().data();
  parallel_for(n, [&](std::size_t i) {
    const T v = x[i];
    T s;
    if (v >= T(0)) {
      s = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      s = e / (T(1) + e);
    }
    out[i] = std::clamp(s, lo, hi);
  });
  return make_op_result<T>("sigmoid", input.shape(), std::move(out), {input}, [](TensorNode<T>& self) {
    auto& x = *self.inputs[0];
    const std::vector<T>& s = self.data;
    parallel_for(self.grad.size(), [&](std::size_t i) { x.grad[i] += self.grad[i] * s[i] * (T(1) - s[i]); });
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  const std::size_t n = input.numel();
  std::vector<T> out(n);
  const T* x = input.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] > T(0) ? x[i] : T(0); });
  if (KinkMonitor* km = KinkMonitor::active()) {
    for (std::size_t i = 0; i < n; ++i) km->record(x[i] > T(0) ? 1 : 0);
  }
  return make_op_result<T>("relu", input.shape(), std::move(out), {input}, [](TensorNode<T>& self) {
    auto& x = *self.inputs[0];
    const T* xd = x.data.data();
    const T* gd = self.grad.data();
    T* xg = x.grad.data();
    parallel_for(self.grad.size(), [=](std::size_t i) { xg[i] += xd[i] > T(0) ? gd[i] : T(0); });
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("add", a, b);
  const std::size_t n = a.numel();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* y = b.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] + y[i]; });
  return make_op_result<T>("add", a.shape(), std::move(out), {a, b}, [](TensorNode<T>& self) {
    for (const auto& in : self.inputs) {
      if (wants_grad(in)) kernels::axpy(self.grad.size(), self.grad.data(), in->grad.data());
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("sub", a, b);
  const std::size_t n = a.numel();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* y = b.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] - y[i]; });
  return make_op_result<T>("sub", a.shape(), std::move(out), {a, b}, [](TensorNode<T>& self) {
    auto& lhs = self.inputs[0];
    auto& rhs = self.inputs[1];
    if (wants_grad(lhs)) kernels::axpy(self.grad.size(), self.grad.data(), lhs->grad.data());
    if (wants_grad(rhs)) parallel_for(self.grad.size(), [&](std::size_t i) { rhs->grad[i] -= self.grad[i]; });
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("mul", a, b);
  const std::size_t n = a.numel();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* y = b.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] * y[i]; });
  return make_op_result<T>("mul", a.shape(), std::move(out), {a, b}, [](TensorNode<T>& self) {
    auto& lhs = self.inputs[0];
    auto& rhs = self.inputs[1];
    if (wants_grad(lhs)) parallel_for(self.grad.size(), [&](std::size_t i) { lhs->grad[i] += self.grad[i] * rhs->data[i]; });
    if (wants_grad(rhs)) parallel_for(self.grad.size(), [&](std::size_t i) { rhs->grad[i] += self.grad[i] * lhs->data[i]; });
  });
}

template <typename T>
Tensor<T> mul_broadcast(const Tensor<T>& a, const Tensor<T>& gate) {
  require_rank4("mul_broadcast", a);
  require_rank4("mul_broadcast gate", gate);
  if (gate.dim(0) != a.dim(0) || gate.dim(1) != a.dim(1) || gate.dim(2) != 1 || gate.dim(3) != 1) {
    fail(Errc::shape_mismatch, "mul_broadcast: gate " + shape_string(gate.shape()) + " does not match features " +
                                   shape_string(a.shape()));
  }
  const std::size_t plane = a.dim(2) * a.dim(3);
  const std::size_t n = a.numel();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* g = gate.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] * g[i / plane]; });
  return make_op_result<T>("mul_broadcast", a.shape(), std::move(out), {a, gate}, [plane](TensorNode<T>& self) {
    auto& feat = self.inputs[0];
    auto& gt = self.inputs[1];
    if (wants_grad(feat)) {
      parallel_for(self.grad.size(), [&](std::size_t i) { feat->grad[i] += self.grad[i] * gt->data[i / plane]; });
    }
    if (wants_grad(gt)) {
      for (std::size_t m = 0; m < gt->data.size(); ++m) {
        T acc = T(0);
        for (std::size_t j = 0; j < plane; ++j) acc += self.grad[m * plane + j] * feat->data[m * plane + j];
        gt->grad[m] += acc;
      }
    }
  });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank4("concat_channels", a);
  require_rank4("concat_channels", b);
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    fail(Errc::shape_mismatch, "concat_channels: " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                                   " differ outside the channel axis");
  }
  const std::size_t batch = a.dim(0);
  const std::size_t sa = a.dim(1) * a.dim(2) * a.dim(3);
  const std::size_t sb = b.dim(1) * b.dim(2) * b.dim(3);
  std::vector<T> out(batch * (sa + sb));
  for (std::size_t n = 0; n < batch; ++n) {
    std::copy_n(a.data().data() + n * sa, sa, out.data() + n * (sa + sb));
    std::copy_n(b.data().data() + n * sb, sb, out.data() + n * (sa + sb) + sa);
  }
  return make_op_result<T>("concat_channels", {batch, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)}, std::move(out),
                           {a, b}, [batch, sa, sb](TensorNode<T>& self) {
                             auto& lhs = self.inputs[0];
                             auto& rhs = self.inputs[1];
                             for (std::size_t n = 0; n < batch; ++n) {
                               const T* g = self.grad.data() + n * (sa + sb);
                               if (wants_grad(lhs)) kernels::axpy(sa, g, lhs->grad.data() + n * sa);
                               if (wants_grad(rhs)) kernels::axpy(sb, g + sa, rhs->grad.data() + n * sb);
                             }
                           });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
  double acc = 0.0;
  for (T v : input.data()) acc += static_cast<double>(v);
  return make_op_result<T>("sum", {1}, {static_cast<T>(acc)}, {input}, [](TensorNode<T>& self) {
    auto& x = *self.inputs[0];
    const T g = self.grad[0];
    parallel_for(x.grad.size(), [&](std::size_t i) { x.grad[i] += g; });
  });
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape("l1_loss", pred, target);
  const std::size_t n = pred.numel();
  if (n == 0) fail(Errc::invalid_argument, "l1_loss: empty tensors");
  const T* p = pred.data().data();
  const T* t = target.data().data();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(p[i]) - static_cast<double>(t[i]));
  if (KinkMonitor* km = KinkMonitor::active()) {
    for (std::size_t i = 0; i < n; ++i) km->record(p[i] > t[i] ? 2 : (p[i] < t[i] ? 0 : 1));
  }
  const T inv = T(1) / static_cast<T>(n);
  return make_op_result<T>("l1_loss", {1}, {static_cast<T>(acc / static_cast<double>(n))}, {pred, target},
                           [inv](TensorNode<T>& self) {
                             auto& pr = self.inputs[0];
                             auto& tg = self.inputs[1];
                             const T g = self.grad[0] * inv;
                             parallel_for(pr->data.size(), [&](std::size_t i) {
                               const T d = pr->data[i] - tg->data[i];
                               const T s = d > T(0) ? g : (d < T(0) ? -g : T(0));
                               if (wants_grad(pr)) pr->grad[i] += s;
                               if (wants_grad(tg)) tg->grad[i] -= s;
                             });
                           });
}

#define RIDNET_INSTANTIATE_OPS(T)                                                                      \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);           \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                                \
  template Tensor<T> soft_shrink(const Tensor<T>&, T);                                                 \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                        \
  template Tensor<T> relu(const Tensor<T>&);                                                           \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                          \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                          \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                          \
  template Tensor<T> mul_broadcast(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> sum(const Tensor<T>&);                                                            \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);

RIDNET_INSTANTIATE_OPS(float)
RIDNET_INSTANTIATE_OPS(double)

#undef RIDNET_INSTANTIATE_OPS

}  // namespace ridnet
