// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Flat `key = value` text files. Blank lines and lines starting with '#' are
// ignored. Unknown keys and unparsable values raise ConfigError naming the key;
// keys that are absent keep their defaults.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "panfuse/fusion.hpp"
#include "panfuse/losses.hpp"
#include "panfuse/postprocess.hpp"
#include "panfuse/synth.hpp"

namespace panfuse {

struct PipelineConfig {
  PostprocessConfig postprocess;  // delta_cen, delta_emb, theta, stuff_classes
  EmbeddingLossParams embedding;  // delta_a, delta_r, beta1..beta3
  FocalParams focal;              // alpha, tau
  PanopticLossWeights weights;    // w1..w3
  double lambda = 1.5;
  std::size_t embedding_dim = 32;
  double p_drop = 0.5;

  /// Canonical text form; parsing it yields an equal config.
  std::string to_text() const;
};

/// Ordered key/value pairs with line numbers for diagnostics.
std::map<std::string, std::string> parse_key_values(std::string_view text);

PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Keys: height, width, num_classes, stuff_classes, num_instances,
/// embedding_dim, delta_r, sem_flip_rate, center_sigma, emb_noise_sigma, seed.
SceneSpec parse_scene_spec(std::string_view text);
SceneSpec load_scene_spec(const std::filesystem::path& path);
std::string to_text(const SceneSpec& spec);

}  // namespace panfuse
