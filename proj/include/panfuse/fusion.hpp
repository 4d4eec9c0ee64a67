// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panfuse/rng.hpp"
#include "panfuse/tensor.hpp"

namespace panfuse {

/// One square 1x1 convolution of the excitation stack.
struct ExcitationLayer {
  Matrix weights;             // C x C
  std::vector<double> bias;   // C

  friend bool operator==(const ExcitationLayer&, const ExcitationLayer&) = default;
};

/// Excitation gate E(x) = sigmoid(conv_L(...conv_1(x)...)). Also used as the
/// channel gate of the squeeze-and-excitation baseline, applied to the pooled
/// channel descriptor.
struct ExcitationParams {
  std::vector<ExcitationLayer> layers;

  /// Channel count shared by every layer. Throws ShapeError if the stack is
  /// empty or any layer is not square with a matching bias.
  std::size_t channels() const;

  /// All-zero parameters with the same structure.
  ExcitationParams zeros_like() const;

  /// `depth` layers of C x C weights and biases filled with `weight`/`bias`.
  static ExcitationParams constant(std::size_t channels, std::size_t depth, double weight, double bias);

  /// Uniform random weights and biases in [-scale, scale].
  static ExcitationParams random(std::size_t channels, std::size_t depth, Rng& rng, double scale = 1.0);

  friend bool operator==(const ExcitationParams&, const ExcitationParams&) = default;
};

enum class FusionVariant { Addition, SqueezeExcite, ExciteOnly, ResidualExcite };

inline constexpr FusionVariant kAllFusionVariants[] = {FusionVariant::Addition, FusionVariant::SqueezeExcite,
                                                       FusionVariant::ExciteOnly, FusionVariant::ResidualExcite};

/// "addition", "squeeze-excite", "excite-only", "residual-excite".
std::string_view to_string(FusionVariant v);
std::optional<FusionVariant> parse_fusion_variant(std::string_view name);

struct FusionConfig {
  FusionVariant variant = FusionVariant::ResidualExcite;
  double lambda = 1.5;
  bool rgb_present = true;
  bool depth_present = true;
};

/// Entrywise excitation gate; same shape as `x`, values in (0, 1).
FeatureMap excite(const FeatureMap& x, const ExcitationParams& p);

/// Squeeze-and-excitation channel gate: C x 1 x 1, one value per channel.
FeatureMap squeeze_excite_gate(const FeatureMap& x, const ExcitationParams& p);

/// Merges the RGB and depth encoder features according to `cfg.variant`.
///
/// A modality whose flag is false contributes zero to every term, whatever
/// is passed for it (a null pointer is allowed there). A null pointer for a
/// present modality, or both flags false, raises PreconditionError.
///
///   residual-excite: x_rgb + lambda * (E(x_rgb) * x_rgb + E(x_depth) * x_depth)
///   excite-only:     lambda * (E(x_rgb) * x_rgb + E(x_depth) * x_depth)
///   addition:        x_rgb + x_depth
///   squeeze-excite:  g_rgb (.) x_rgb + g_depth (.) x_depth, g = sigmoid(W avgpool(x))
FeatureMap fuse(const FeatureMap* x_rgb, const FeatureMap* x_depth, const ExcitationParams& p_rgb,
                const ExcitationParams& p_depth, const FusionConfig& cfg);

struct FusionGradients {
  FeatureMap rgb;
  FeatureMap depth;
  ExcitationParams params_rgb;
  ExcitationParams params_depth;
};

/// Gradients of a downstream scalar loss with respect to every fusion input,
/// given dL/d(out). An absent modality receives exactly-zero gradients, shaped
/// like the present modality's input and its own parameter stack.
FusionGradients fuse_backward(const FeatureMap& grad_out, const FeatureMap* x_rgb, const FeatureMap* x_depth,
                              const ExcitationParams& p_rgb, const ExcitationParams& p_depth,
                              const FusionConfig& cfg);

}  // namespace panfuse
