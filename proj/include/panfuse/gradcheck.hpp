// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panfuse/fusion.hpp"
#include "panfuse/losses.hpp"
#include "panfuse/rng.hpp"

namespace panfuse {

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckEps = 1e-5;

/// max_i |a_i - n_i| / max(max_i |a_i|, max_i |n_i|); 0 when both are zero.
double relative_gradient_error(const FeatureMap& analytic, const FeatureMap& numeric);

struct GradCheckResult {
  std::string name;
  std::size_t instances = 0;
  double max_relative_error = 0.0;

  bool passed(double tolerance = kGradCheckTolerance) const { return max_relative_error < tolerance; }
};

/// Random fusion problem: features, excitation stacks, flags and a fixed
/// downstream weighting R so that the scalar loss is sum(R * fuse(...)).
struct FusionProblem {
  FeatureMap rgb;
  FeatureMap depth;
  ExcitationParams p_rgb;
  ExcitationParams p_depth;
  FusionConfig cfg;
  FeatureMap loss_weights;

  double loss() const;
};

FusionProblem random_fusion_problem(FusionVariant variant, Rng& rng, bool allow_missing = true);

/// Random embedding-loss problem whose pairwise distances stay at least
/// `margin_gap` away from every hinge kink.
struct EmbeddingProblem {
  FeatureMap emb;
  InstanceAnnotation annotation;
  EmbeddingLossParams params;
};

EmbeddingProblem random_embedding_problem(Rng& rng, double margin_gap = 1e-3);

struct FocalProblem {
  FeatureMap pred;
  LabelMap target;
  FocalParams params;
};

FocalProblem random_focal_problem(Rng& rng);

/// Central-difference check of every fusion input and parameter.
GradCheckResult check_fusion_gradients(FusionVariant variant, std::uint64_t seed, std::size_t instances);
GradCheckResult check_focal_gradients(std::uint64_t seed, std::size_t instances);
GradCheckResult check_embedding_gradients(std::uint64_t seed, std::size_t instances);

}  // namespace panfuse
