// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops. Every kernel exists twice with identical
// signatures: `serial::` is the plain reference used by tests, `omp::` is the
// OpenMP version the library calls. Both produce bit-identical results; the
// parallel versions only split independent output elements across threads and
// never reorder a floating-point reduction.

#include <cstddef>
#include <cstdint>
#include <span>

namespace panfuse::kernels {

/// Spatial layout of a channel-major map: `channels` planes of `plane` values.
struct PlaneLayout {
  std::size_t channels;
  std::size_t plane;
};

/// One center candidate for pixel assignment.
struct CenterRef {
  std::int32_t class_id;
  std::span<const double> embedding;  // length = embedding dimension
};

#define PANFUSE_KERNEL_DECLS                                                                            \
  void add(std::span<const double> a, std::span<const double> b, std::span<double> out);                \
  void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);                \
  void scale(std::span<const double> x, double factor, std::span<double> out);                          \
  void sigmoid(std::span<const double> x, std::span<double> out);                                       \
  /* out[o,p] = bias[o] + sum_i w[o,i] x[i,p]; w is out.channels x in.channels row-major */             \
  void conv1x1(std::span<const double> x, PlaneLayout in, std::span<const double> w,                    \
               std::span<const double> bias, std::span<double> out, PlaneLayout out_layout);            \
  /* grad_in[i,p] = sum_o w[o,i] grad_out[o,p] */                                                       \
  void conv1x1_grad_input(std::span<const double> grad_out, PlaneLayout out_layout,                     \
                          std::span<const double> w, std::span<double> grad_in, PlaneLayout in);        \
  /* grad_w[o,i] = sum_p grad_out[o,p] x[i,p];  grad_b[o] = sum_p grad_out[o,p] */                      \
  void conv1x1_grad_params(std::span<const double> grad_out, PlaneLayout out_layout,                    \
                           std::span<const double> x, PlaneLayout in, std::span<double> grad_w,         \
                           std::span<double> grad_b);                                                   \
  /* For each pixel p with a class listed in `centers`: index of the nearest                            \
     same-class center by Euclidean embedding distance if that distance is                              \
     strictly below `theta`, else -1. Ties go to the lower center index.                                \
     `emb` is dim x plane channel-major. */                                                             \
  void nearest_center(std::span<const std::int32_t> classes, std::span<const double> emb,               \
                      PlaneLayout emb_layout, std::span<const CenterRef> centers, double theta,         \
                      std::span<std::int32_t> assignment);

namespace serial {
PANFUSE_KERNEL_DECLS
}  // namespace serial

namespace omp {
PANFUSE_KERNEL_DECLS
/// Number of threads the parallel kernels will use.
int max_threads();
}  // namespace omp

#undef PANFUSE_KERNEL_DECLS

}  // namespace panfuse::kernels
