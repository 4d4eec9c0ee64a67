// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdint>
#include <limits>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "panfuse/kernels.hpp"
#include "panfuse/tensor.hpp"

namespace panfuse::kernels::omp {

namespace {
// Below this many output elements the fork/join overhead dominates.
constexpr std::int64_t kMinParallel = 1 << 14;

std::int64_t signed_size(std::size_t n) { return static_cast<std::int64_t>(n); }
}  // namespace

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::int64_t n = signed_size(out.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::int64_t n = signed_size(out.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(std::span<const double> x, double factor, std::span<double> out) {
  const std::int64_t n = signed_size(out.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::int64_t i = 0; i < n; ++i) out[i] = factor * x[i];
}

void sigmoid(std::span<const double> x, std::span<double> out) {
  const std::int64_t n = signed_size(out.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::int64_t i = 0; i < n; ++i) out[i] = panfuse::sigmoid(x[i]);
}

void conv1x1(std::span<const double> x, PlaneLayout in, std::span<const double> w, std::span<const double> bias,
             std::span<double> out, PlaneLayout out_layout) {
  const std::int64_t plane = signed_size(in.plane);
  const std::int64_t work = plane * signed_size(out_layout.channels * in.channels);
  // Pixels are independent; each thread owns a range of columns of every output plane.
#pragma omp parallel for schedule(static) if (work >= kMinParallel)
  for (std::int64_t p = 0; p < plane; ++p) {
    for (std::size_t o = 0; o < out_layout.channels; ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < in.channels; ++i) acc += w[o * in.channels + i] * x[i * in.plane + p];
      out[o * in.plane + p] = acc;
    }
  }
}

void conv1x1_grad_input(std::span<const double> grad_out, PlaneLayout out_layout, std::span<const double> w,
                        std::span<double> grad_in, PlaneLayout in) {
  const std::int64_t plane = signed_size(in.plane);
  const std::int64_t work = plane * signed_size(out_layout.channels * in.channels);
#pragma omp parallel for schedule(static) if (work >= kMinParallel)
  for (std::int64_t p = 0; p < plane; ++p) {
    for (std::size_t i = 0; i < in.channels; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < out_layout.channels; ++o) acc += w[o * in.channels + i] * grad_out[o * in.plane + p];
      grad_in[i * in.plane + p] = acc;
    }
  }
}

void conv1x1_grad_params(std::span<const double> grad_out, PlaneLayout out_layout, std::span<const double> x,
                         PlaneLayout in, std::span<double> grad_w, std::span<double> grad_b) {
  // One task per (o, i) weight entry; the pixel sum inside stays sequential so
  // the result matches the serial kernel bit for bit.
  const std::int64_t rows = signed_size(out_layout.channels);
  const std::int64_t cols = signed_size(in.channels);
  const std::int64_t work = rows * cols * signed_size(in.plane);
#pragma omp parallel for collapse(2) schedule(static) if (work >= kMinParallel)
  for (std::int64_t o = 0; o < rows; ++o) {
    for (std::int64_t i = -1; i < cols; ++i) {
      const auto g = grad_out.subspan(static_cast<std::size_t>(o) * in.plane, in.plane);
      double acc = 0.0;
      if (i < 0) {
        for (std::size_t p = 0; p < in.plane; ++p) acc += g[p];
        grad_b[o] = acc;
      } else {
        const auto xi = x.subspan(static_cast<std::size_t>(i) * in.plane, in.plane);
        for (std::size_t p = 0; p < in.plane; ++p) acc += g[p] * xi[p];
        grad_w[o * cols + i] = acc;
      }
    }
  }
}

void nearest_center(std::span<const std::int32_t> classes, std::span<const double> emb, PlaneLayout emb_layout,
                    std::span<const CenterRef> centers, double theta, std::span<std::int32_t> assignment) {
  const std::int64_t plane = signed_size(emb_layout.plane);
  const std::int64_t work = plane * signed_size(centers.size() * emb_layout.channels);
#pragma omp parallel for schedule(static) if (work >= kMinParallel)
  for (std::int64_t p = 0; p < plane; ++p) {
    double best = std::numeric_limits<double>::infinity();
    std::int32_t best_index = -1;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (centers[k].class_id != classes[p]) continue;
      double d2 = 0.0;
      for (std::size_t d = 0; d < emb_layout.channels; ++d) {
        const double diff = emb[d * emb_layout.plane + p] - centers[k].embedding[d];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        best_index = static_cast<std::int32_t>(k);
      }
    }
    assignment[p] = (best_index >= 0 && std::sqrt(best) < theta) ? best_index : -1;
  }
}

}  // namespace panfuse::kernels::omp
