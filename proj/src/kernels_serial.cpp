// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "panfuse/kernels.hpp"
#include "panfuse/tensor.hpp"

namespace panfuse::kernels::serial {

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

void scale(std::span<const double> x, double factor, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x[i];
}

void sigmoid(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = panfuse::sigmoid(x[i]);
}

void conv1x1(std::span<const double> x, PlaneLayout in, std::span<const double> w, std::span<const double> bias,
             std::span<double> out, PlaneLayout out_layout) {
  for (std::size_t o = 0; o < out_layout.channels; ++o) {
    for (std::size_t p = 0; p < in.plane; ++p) {
      double acc = bias[o];
      for (std::size_t i = 0; i < in.channels; ++i) acc += w[o * in.channels + i] * x[i * in.plane + p];
      out[o * in.plane + p] = acc;
    }
  }
}

void conv1x1_grad_input(std::span<const double> grad_out, PlaneLayout out_layout, std::span<const double> w,
                        std::span<double> grad_in, PlaneLayout in) {
  for (std::size_t i = 0; i < in.channels; ++i) {
    for (std::size_t p = 0; p < in.plane; ++p) {
      double acc = 0.0;
      for (std::size_t o = 0; o < out_layout.channels; ++o) acc += w[o * in.channels + i] * grad_out[o * in.plane + p];
      grad_in[i * in.plane + p] = acc;
    }
  }
}

void conv1x1_grad_params(std::span<const double> grad_out, PlaneLayout out_layout, std::span<const double> x,
                         PlaneLayout in, std::span<double> grad_w, std::span<double> grad_b) {
  for (std::size_t o = 0; o < out_layout.channels; ++o) {
    const auto g = grad_out.subspan(o * in.plane, in.plane);
    double gb = 0.0;
    for (std::size_t p = 0; p < in.plane; ++p) gb += g[p];
    grad_b[o] = gb;
    for (std::size_t i = 0; i < in.channels; ++i) {
      const auto xi = x.subspan(i * in.plane, in.plane);
      double acc = 0.0;
      for (std::size_t p = 0; p < in.plane; ++p) acc += g[p] * xi[p];
      grad_w[o * in.channels + i] = acc;
    }
  }
}

void nearest_center(std::span<const std::int32_t> classes, std::span<const double> emb, PlaneLayout emb_layout,
                    std::span<const CenterRef> centers, double theta, std::span<std::int32_t> assignment) {
  for (std::size_t p = 0; p < emb_layout.plane; ++p) {
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

}  // namespace panfuse::kernels::serial
