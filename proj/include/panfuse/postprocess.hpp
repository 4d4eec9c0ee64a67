// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "panfuse/losses.hpp"
#include "panfuse/tensor.hpp"

namespace panfuse {

/// Raw predictions of the three decoder heads for one image.
struct DecoderOutputs {
  FeatureMap sem;  // C x H x W class probabilities
  FeatureMap cen;  // 1 x H x W center probabilities
  FeatureMap emb;  // D x H x W embeddings

  /// Throws ShapeError / ValidationError on inconsistent or out-of-range heads.
  void validate() const;
};

struct PostprocessConfig {
  double delta_cen = 0.5;  // center-probability threshold
  double delta_emb = 0.5;  // embedding distance for joining blob neighbours
  double theta = 0.5;      // embedding distance for assigning pixels to centers
  std::set<std::int32_t> stuff_classes{0, 1};

  bool is_thing(std::int32_t class_id) const { return !stuff_classes.contains(class_id); }
};

/// Per-pixel class and instance labelling. Instance 0 means "no instance".
struct PanopticMask {
  LabelMap class_map;
  LabelMap instance_map;

  std::size_t height() const noexcept { return class_map.height(); }
  std::size_t width() const noexcept { return class_map.width(); }

  friend bool operator==(const PanopticMask&, const PanopticMask&) = default;
};

struct Blob {
  std::vector<Pixel> pixels;  // raster order
  std::int32_t class_id = 0;
  Pixel peak;

  friend bool operator==(const Blob&, const Blob&) = default;
};

struct Center {
  Pixel pixel;
  std::int32_t class_id = 0;

  friend bool operator==(const Center&, const Center&) = default;
};

/// Per-pixel argmax over channels; ties go to the lower class id.
LabelMap semantic_argmax(const FeatureMap& sem);

/// Pixels with cen >= delta_cen whose predicted class is a thing class, in raster order.
std::vector<Pixel> threshold_centers(const FeatureMap& cen, const LabelMap& sem_argmax, const PostprocessConfig& cfg);

/// 4-connected components of `omega`, where two neighbours join only if they
/// share a class and their embeddings are closer than delta_emb. The peak is
/// the member with the highest center probability (lowest raster index on ties).
/// Blobs are returned ordered by their first pixel.
std::vector<Blob> extract_blobs(const std::vector<Pixel>& omega, const LabelMap& sem_argmax, const FeatureMap& emb,
                                const FeatureMap& cen, const PostprocessConfig& cfg);

/// One center per blob (its peak), in raster order.
std::vector<Center> nms_centers(const std::vector<Blob>& blobs);

/// Assigns every thing pixel to the nearest same-class center in embedding
/// space if closer than theta. Instance ids are 1..N in raster order of the
/// centers that received at least one pixel.
PanopticMask assign_pixels(const std::vector<Center>& centers, const LabelMap& sem_argmax, const FeatureMap& emb,
                           const PostprocessConfig& cfg);

/// threshold_centers -> extract_blobs -> nms_centers -> assign_pixels.
PanopticMask panoptic_inference(const DecoderOutputs& out, const PostprocessConfig& cfg);

/// 4-connected (city-block) distance from each pixel of an instance to the
/// nearest pixel outside it; the image border counts as outside. 0 on
/// background pixels.
Grid<std::int32_t> instance_distance_transform(const LabelMap& instance_map);

/// One interior point per nonzero instance id: the pixel farthest from the
/// instance boundary, lowest raster index on ties. Sorted by id.
std::vector<InstanceCenter> center_ground_truth(const LabelMap& instance_map);

}  // namespace panfuse
