// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "panfuse/kernels.hpp"

namespace panfuse {

std::string Shape::str() const {
  return "(" + std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width) + ")";
}

FeatureMap::FeatureMap(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : shape_{channels, height, width}, data_(channels * height * width, fill) {}

FeatureMap::FeatureMap(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("feature map data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_.str());
  }
}

bool FeatureMap::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

FeatureMap elementwise_add(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "elementwise_add");
  FeatureMap out = FeatureMap::zeros_like(a);
  kernels::omp::add(a.data(), b.data(), out.data());
  return out;
}

FeatureMap elementwise_mul(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "elementwise_mul");
  FeatureMap out = FeatureMap::zeros_like(a);
  kernels::omp::mul(a.data(), b.data(), out.data());
  return out;
}

FeatureMap scale(const FeatureMap& x, double factor) {
  FeatureMap out = FeatureMap::zeros_like(x);
  kernels::omp::scale(x.data(), factor, out.data());
  return out;
}

FeatureMap conv1x1(const FeatureMap& x, const Matrix& weights, std::span<const double> bias) {
  if (weights.cols() != x.channels()) {
    throw ShapeError("conv1x1: weights expect " + std::to_string(weights.cols()) + " input channels, got " +
                     x.shape().str());
  }
  if (bias.size() != weights.rows()) {
    throw ShapeError("conv1x1: bias length " + std::to_string(bias.size()) + " does not match " +
                     std::to_string(weights.rows()) + " output channels");
  }
  FeatureMap out(weights.rows(), x.height(), x.width());
  kernels::omp::conv1x1(x.data(), {x.channels(), x.shape().plane()}, weights.data(), bias, out.data(),
                        {weights.rows(), x.shape().plane()});
  return out;
}

Conv1x1Grad conv1x1_backward(const FeatureMap& grad_out, const FeatureMap& x, const Matrix& weights) {
  if (weights.cols() != x.channels() || grad_out.channels() != weights.rows() || grad_out.height() != x.height() ||
      grad_out.width() != x.width()) {
    throw ShapeError("conv1x1_backward: incompatible shapes grad " + grad_out.shape().str() + ", input " +
                     x.shape().str());
  }
  const kernels::PlaneLayout in{x.channels(), x.shape().plane()};
  const kernels::PlaneLayout out{weights.rows(), x.shape().plane()};
  Conv1x1Grad grad{FeatureMap::zeros_like(x), Matrix(weights.rows(), weights.cols()),
                   std::vector<double>(weights.rows())};
  kernels::omp::conv1x1_grad_input(grad_out.data(), out, weights.data(), grad.input.data(), in);
  kernels::omp::conv1x1_grad_params(grad_out.data(), out, x.data(), in, grad.weights.data(), grad.bias);
  return grad;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

FeatureMap sigmoid(const FeatureMap& x) {
  FeatureMap out = FeatureMap::zeros_like(x);
  kernels::omp::sigmoid(x.data(), out.data());
  return out;
}

double sum(const FeatureMap& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return acc;
}

FeatureMap finite_diff_gradient(const ScalarFunction& f, const FeatureMap& x, double eps) {
  if (!(eps > 0.0)) throw ValidationError("finite_diff_gradient: eps must be positive");
  FeatureMap probe = x;
  FeatureMap grad = FeatureMap::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + eps;
    const double forward = f(probe);
    probe[i] = original - eps;
    const double backward = f(probe);
    probe[i] = original;
    if (!std::isfinite(forward) || !std::isfinite(backward)) {
      throw NumericError("finite_diff_gradient: non-finite function value at element " + std::to_string(i));
    }
    grad[i] = (forward - backward) / (2.0 * eps);
  }
  return grad;
}

}  // namespace panfuse
