// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "panfuse/tensor.hpp"

namespace panfuse {

/// Lower clamp applied inside every logarithm.
inline constexpr double kProbabilityClamp = 1e-12;

struct FocalParams {
  double alpha = 0.1;
  double tau = 2.0;
};

struct EmbeddingLossParams {
  double delta_a = 0.1;  // attraction margin
  double delta_r = 1.0;  // repulsion margin
  double beta1 = 1.0;
  double beta2 = 1.0;
  double beta3 = 0.001;
};

struct PanopticLossWeights {
  double w1 = 1.0;   // semantic
  double w2 = 0.1;   // center
  double w3 = 10.0;  // embedding
};

struct InstanceCenter {
  std::int32_t id = 0;
  Pixel pixel;

  friend bool operator==(const InstanceCenter&, const InstanceCenter&) = default;
};

/// Instance layout of one image: per-pixel ids (0 = none) and one interior
/// center per instance. K is `centers.size()`.
struct InstanceAnnotation {
  LabelMap instance_ids;
  std::vector<InstanceCenter> centers;

  std::size_t num_instances() const noexcept { return centers.size(); }

  /// Throws ValidationError unless every center is in bounds and inside its
  /// instance, and every nonzero id has exactly one center.
  void validate() const;
};

/// Mean over pixels of -ln(probs[label]). `probs` must sum to 1 per pixel.
double cross_entropy(const FeatureMap& probs, const LabelMap& labels);

/// Mean over pixels of the binary focal loss. `pred` is 1 x H x W in [0, 1],
/// `target` is H x W with values in {0, 1}.
double focal_loss(const FeatureMap& pred, const LabelMap& target, const FocalParams& p = {});

/// dL/d(pred) of `focal_loss`, shaped like `pred`.
FeatureMap focal_loss_backward(const FeatureMap& pred, const LabelMap& target, const FocalParams& p = {});

struct EmbeddingLossTerms {
  double attraction = 0.0;
  double repulsion = 0.0;
  double regularization = 0.0;
  double total = 0.0;
};

/// Composed hinged embedding loss. Attraction pulls every instance pixel
/// toward its center's embedding, repulsion pushes centers of distinct
/// instances apart (mean over unordered pairs), regularization is the mean
/// center-embedding norm.
EmbeddingLossTerms embedding_loss(const FeatureMap& emb, const InstanceAnnotation& ann,
                                  const EmbeddingLossParams& p = {});

/// dL_emb/d(emb). Hinge kinks and zero-length differences take subgradient 0.
FeatureMap embedding_loss_backward(const FeatureMap& emb, const InstanceAnnotation& ann,
                                   const EmbeddingLossParams& p = {});

double panoptic_loss(double semantic, double center, double embedding, const PanopticLossWeights& w = {});

}  // namespace panfuse
