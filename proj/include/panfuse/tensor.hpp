// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "panfuse/error.hpp"

namespace panfuse {

/// Dimensions of a rank-3 feature map.
struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t plane() const noexcept { return height * width; }
  std::size_t numel() const noexcept { return channels * height * width; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense C x H x W array of doubles, channel-major then row then column.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  FeatureMap(Shape shape, std::vector<double> data);

  static FeatureMap zeros(std::size_t c, std::size_t h, std::size_t w) { return {c, h, w, 0.0}; }
  static FeatureMap ones(std::size_t c, std::size_t h, std::size_t w) { return {c, h, w, 1.0}; }
  static FeatureMap zeros_like(const FeatureMap& other) { return {other.shape_, std::vector<double>(other.size())}; }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t channels() const noexcept { return shape_.channels; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(std::size_t c, std::size_t h, std::size_t w) { return data_[index(c, h, w)]; }
  double operator()(std::size_t c, std::size_t h, std::size_t w) const { return data_[index(c, h, w)]; }

  std::size_t index(std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return (c * shape_.height + h) * shape_.width + w;
  }

  /// Channel slice for one spatial plane.
  std::span<double> channel(std::size_t c) { return std::span(data_).subspan(c * shape_.plane(), shape_.plane()); }
  std::span<const double> channel(std::size_t c) const {
    return std::span(data_).subspan(c * shape_.plane(), shape_.plane());
  }

  bool all_finite() const noexcept;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Pixel coordinate. Raster order (row, then column) is the canonical order.
struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// H x W grid of integral labels (class ids, instance ids, binary targets).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{}) : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data) : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw ShapeError("grid data length " + std::to_string(data_.size()) + " does not match " +
                       std::to_string(height_) + "x" + std::to_string(width_));
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(Pixel p) { return data_[linear(p)]; }
  const T& at(Pixel p) const { return data_[linear(p)]; }

  std::size_t linear(Pixel p) const noexcept {
    return static_cast<std::size_t>(p.row) * width_ + static_cast<std::size_t>(p.col);
  }
  Pixel pixel(std::size_t i) const noexcept {
    return {static_cast<int>(i / width_), static_cast<int>(i % width_)};
  }
  bool contains(Pixel p) const noexcept {
    return p.row >= 0 && p.col >= 0 && static_cast<std::size_t>(p.row) < height_ &&
           static_cast<std::size_t>(p.col) < width_;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using LabelMap = Grid<std::int32_t>;

// ---------------------------------------------------------------------------
// Feature-map arithmetic. All functions are pure.

FeatureMap elementwise_add(const FeatureMap& a, const FeatureMap& b);
FeatureMap elementwise_mul(const FeatureMap& a, const FeatureMap& b);
FeatureMap scale(const FeatureMap& x, double factor);

/// out[o,h,w] = bias[o] + sum_i weights[o,i] * x[i,h,w]
FeatureMap conv1x1(const FeatureMap& x, const Matrix& weights, std::span<const double> bias);

/// Gradients of a scalar through conv1x1 given dL/d(out).
struct Conv1x1Grad {
  FeatureMap input;
  Matrix weights;
  std::vector<double> bias;
};
Conv1x1Grad conv1x1_backward(const FeatureMap& grad_out, const FeatureMap& x, const Matrix& weights);

/// Logistic function, numerically stable for large |x|.
FeatureMap sigmoid(const FeatureMap& x);
double sigmoid(double x) noexcept;

double sum(const FeatureMap& x);

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* op);

using ScalarFunction = std::function<double(const FeatureMap&)>;

/// Central-difference gradient of `f` at `x`, one entry per element.
/// Throws NumericError if any evaluation of `f` is not finite.
FeatureMap finite_diff_gradient(const ScalarFunction& f, const FeatureMap& x, double eps = 1e-5);

}  // namespace panfuse
