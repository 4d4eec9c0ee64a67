// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>

#include "panfuse/losses.hpp"
#include "panfuse/postprocess.hpp"

namespace panfuse {

struct SceneNoise {
  double sem_flip_rate = 0.0;    // per-pixel probability of a wrong class
  double center_sigma = 0.0;     // Gaussian bump width; 0 gives single-pixel peaks
  double emb_noise_sigma = 0.0;  // isotropic embedding noise
};

/// Parameters of a synthetic scene with known panoptic ground truth.
struct SceneSpec {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t num_classes = 6;
  std::set<std::int32_t> stuff_classes{0, 1};
  std::size_t num_instances = 3;
  std::size_t embedding_dim = 32;
  double delta_r = 1.0;  // instance embeddings are at least 2 * delta_r apart
  SceneNoise noise;
  std::uint64_t seed = 0;

  /// Throws ValidationError on inconsistent parameters.
  void validate() const;
};

struct Scene {
  PanopticMask gt;
  DecoderOutputs out;
  InstanceAnnotation annotation;
  FeatureMap center_target;  // 1 x H x W, 1 at annotated centers
};

/// Places `num_instances` non-overlapping rectangles and ellipses of thing
/// classes on a stuff background and synthesizes matching decoder outputs.
/// Deterministic in `spec.seed`. Throws GenerationError if the instances do
/// not fit after a bounded number of placement attempts.
Scene generate(const SceneSpec& spec);

}  // namespace panfuse
