// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace panfuse {

namespace {

std::string at_pixel(const LabelMap& grid, std::size_t i) {
  const Pixel p = grid.pixel(i);
  return "(" + std::to_string(p.row) + ", " + std::to_string(p.col) + ")";
}

void require_plane(const FeatureMap& map, const LabelMap& grid, const char* op) {
  if (map.height() != grid.height() || map.width() != grid.width()) {
    throw ShapeError(std::string(op) + ": map " + map.shape().str() + " vs grid " + std::to_string(grid.height()) +
                     "x" + std::to_string(grid.width()));
  }
}

void validate_focal_inputs(const FeatureMap& pred, const LabelMap& target, const FocalParams& p) {
  if (pred.channels() != 1) throw ShapeError("focal_loss: prediction must have one channel, got " + pred.shape().str());
  require_plane(pred, target, "focal_loss");
  if (!(p.alpha > 0.0 && p.alpha < 1.0) || !(p.tau >= 0.0)) {
    throw ValidationError("focal_loss: alpha must be in (0,1) and tau non-negative");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] >= 0.0 && pred[i] <= 1.0)) {
      throw ValidationError("focal_loss: prediction " + std::to_string(pred[i]) + " outside [0,1] at " +
                            at_pixel(target, i));
    }
    if (target[i] != 0 && target[i] != 1) {
      throw ValidationError("focal_loss: target is not binary at " + at_pixel(target, i));
    }
  }
}

double clamp_probability(double y) { return std::clamp(y, kProbabilityClamp, 1.0 - kProbabilityClamp); }

// Per-instance pixel lists, indexed like `ann.centers`.
std::vector<std::vector<std::size_t>> instance_pixels(const InstanceAnnotation& ann) {
  std::unordered_map<std::int32_t, std::size_t> slot;
  for (std::size_t k = 0; k < ann.centers.size(); ++k) slot.emplace(ann.centers[k].id, k);
  std::vector<std::vector<std::size_t>> pixels(ann.centers.size());
  for (std::size_t i = 0; i < ann.instance_ids.size(); ++i) {
    const std::int32_t id = ann.instance_ids[i];
    if (id != 0) pixels[slot.at(id)].push_back(i);
  }
  return pixels;
}

void validate_embedding_inputs(const FeatureMap& emb, const InstanceAnnotation& ann, const EmbeddingLossParams& p) {
  require_plane(emb, ann.instance_ids, "embedding_loss");
  ann.validate();
  if (!emb.all_finite()) throw ValidationError("embedding_loss: embedding map contains non-finite values");
  if (p.delta_a < 0.0 || p.delta_r < 0.0 || p.beta1 < 0.0 || p.beta2 < 0.0 || p.beta3 < 0.0) {
    throw ValidationError("embedding_loss: margins and weights must be non-negative");
  }
}

std::vector<double> embedding_at(const FeatureMap& emb, std::size_t linear) {
  std::vector<double> v(emb.channels());
  for (std::size_t d = 0; d < emb.channels(); ++d) v[d] = emb[d * emb.shape().plane() + linear];
  return v;
}

double distance(const FeatureMap& emb, std::size_t a, std::size_t b) {
  const std::size_t plane = emb.shape().plane();
  double d2 = 0.0;
  for (std::size_t d = 0; d < emb.channels(); ++d) {
    const double diff = emb[d * plane + a] - emb[d * plane + b];
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

// grad[a] += w * (e_a - e_b) / |e_a - e_b|; grad[b] -= the same.
void add_distance_gradient(const FeatureMap& emb, std::size_t a, std::size_t b, double dist, double w,
                           FeatureMap& grad) {
  if (dist == 0.0) return;
  const std::size_t plane = emb.shape().plane();
  for (std::size_t d = 0; d < emb.channels(); ++d) {
    const double g = w * (emb[d * plane + a] - emb[d * plane + b]) / dist;
    grad[d * plane + a] += g;
    grad[d * plane + b] -= g;
  }
}

}  // namespace

void InstanceAnnotation::validate() const {
  std::unordered_map<std::int32_t, std::size_t> seen;
  for (const auto& c : centers) {
    if (!instance_ids.contains(c.pixel)) {
      throw ValidationError("instance " + std::to_string(c.id) + ": center (" + std::to_string(c.pixel.row) + ", " +
                            std::to_string(c.pixel.col) + ") lies outside the " +
                            std::to_string(instance_ids.height()) + "x" + std::to_string(instance_ids.width()) +
                            " map");
    }
    if (c.id <= 0) throw ValidationError("instance centers must carry a positive id");
    if (instance_ids.at(c.pixel) != c.id) {
      throw ValidationError("instance " + std::to_string(c.id) + ": center is not inside the instance mask");
    }
    if (++seen[c.id] > 1) throw ValidationError("instance " + std::to_string(c.id) + " has more than one center");
  }
  for (std::size_t i = 0; i < instance_ids.size(); ++i) {
    const std::int32_t id = instance_ids[i];
    if (id < 0) throw ValidationError("negative instance id at " + at_pixel(instance_ids, i));
    if (id != 0 && !seen.contains(id)) throw ValidationError("instance " + std::to_string(id) + " has no center");
  }
}

double cross_entropy(const FeatureMap& probs, const LabelMap& labels) {
  require_plane(probs, labels, "cross_entropy");
  const std::size_t plane = probs.shape().plane();
  const std::size_t classes = probs.channels();
  double total = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    double mass = 0.0;
    for (std::size_t c = 0; c < classes; ++c) mass += probs[c * plane + i];
    if (!(std::abs(mass - 1.0) <= 1e-6)) {
      throw ValidationError("cross_entropy: probabilities sum to " + std::to_string(mass) + " at " +
                            at_pixel(labels, i));
    }
    const std::int32_t label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ValidationError("cross_entropy: label " + std::to_string(label) + " out of range at " +
                            at_pixel(labels, i));
    }
    total += -std::log(std::max(probs[static_cast<std::size_t>(label) * plane + i], kProbabilityClamp));
  }
  return total / static_cast<double>(plane);
}

double focal_loss(const FeatureMap& pred, const LabelMap& target, const FocalParams& p) {
  validate_focal_inputs(pred, target, p);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = clamp_probability(pred[i]);
    if (target[i] == 1) {
      total += -p.alpha * std::pow(1.0 - y, p.tau) * std::log(y);
    } else {
      total += -(1.0 - p.alpha) * std::pow(y, p.tau) * std::log(1.0 - y);
    }
  }
  return total / static_cast<double>(pred.size());
}

FeatureMap focal_loss_backward(const FeatureMap& pred, const LabelMap& target, const FocalParams& p) {
  validate_focal_inputs(pred, target, p);
  FeatureMap grad = FeatureMap::zeros_like(pred);
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = pred[i];
    // The clamp is flat outside its range.
    if (y < kProbabilityClamp || y > 1.0 - kProbabilityClamp) continue;
    double d = 0.0;
    if (target[i] == 1) {
      // d/dy [-a (1-y)^t ln y] = a t (1-y)^(t-1) ln y - a (1-y)^t / y
      const double lead = p.tau == 0.0 ? 0.0 : p.alpha * p.tau * std::pow(1.0 - y, p.tau - 1.0) * std::log(y);
      d = lead - p.alpha * std::pow(1.0 - y, p.tau) / y;
    } else {
      // d/dy [-(1-a) y^t ln(1-y)] = -(1-a) t y^(t-1) ln(1-y) + (1-a) y^t / (1-y)
      const double lead = p.tau == 0.0 ? 0.0 : -(1.0 - p.alpha) * p.tau * std::pow(y, p.tau - 1.0) * std::log(1.0 - y);
      d = lead + (1.0 - p.alpha) * std::pow(y, p.tau) / (1.0 - y);
    }
    grad[i] = d * inv_n;
  }
  return grad;
}

EmbeddingLossTerms embedding_loss(const FeatureMap& emb, const InstanceAnnotation& ann, const EmbeddingLossParams& p) {
  validate_embedding_inputs(emb, ann, p);
  EmbeddingLossTerms terms;
  const std::size_t k_count = ann.centers.size();
  if (k_count == 0) return terms;

  const auto pixels = instance_pixels(ann);
  std::vector<std::size_t> center_index(k_count);
  for (std::size_t k = 0; k < k_count; ++k) center_index[k] = ann.instance_ids.linear(ann.centers[k].pixel);

  for (std::size_t k = 0; k < k_count; ++k) {
    double acc = 0.0;
    for (std::size_t q : pixels[k]) acc += std::max(0.0, distance(emb, center_index[k], q) - p.delta_a);
    terms.attraction += acc / static_cast<double>(pixels[k].size());
  }
  terms.attraction /= static_cast<double>(k_count);

  if (k_count > 1) {
    double acc = 0.0;
    for (std::size_t a = 0; a < k_count; ++a) {
      for (std::size_t b = a + 1; b < k_count; ++b) {
        acc += std::max(0.0, p.delta_r - distance(emb, center_index[a], center_index[b]));
      }
    }
    terms.repulsion = acc / (static_cast<double>(k_count * (k_count - 1)) / 2.0);
  }

  for (std::size_t k = 0; k < k_count; ++k) {
    double n2 = 0.0;
    for (double v : embedding_at(emb, center_index[k])) n2 += v * v;
    terms.regularization += std::sqrt(n2);
  }
  terms.regularization /= static_cast<double>(k_count);

  terms.total = p.beta1 * terms.attraction + p.beta2 * terms.repulsion + p.beta3 * terms.regularization;
  return terms;
}

FeatureMap embedding_loss_backward(const FeatureMap& emb, const InstanceAnnotation& ann, const EmbeddingLossParams& p) {
  validate_embedding_inputs(emb, ann, p);
  FeatureMap grad = FeatureMap::zeros_like(emb);
  const std::size_t k_count = ann.centers.size();
  if (k_count == 0) return grad;

  const auto pixels = instance_pixels(ann);
  std::vector<std::size_t> center_index(k_count);
  for (std::size_t k = 0; k < k_count; ++k) center_index[k] = ann.instance_ids.linear(ann.centers[k].pixel);
  const double kd = static_cast<double>(k_count);

  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = p.beta1 / (kd * static_cast<double>(pixels[k].size()));
    for (std::size_t q : pixels[k]) {
      const double dist = distance(emb, center_index[k], q);
      if (dist - p.delta_a > 0.0) add_distance_gradient(emb, center_index[k], q, dist, w, grad);
    }
  }

  if (k_count > 1) {
    const double w = -p.beta2 / (kd * (kd - 1.0) / 2.0);
    for (std::size_t a = 0; a < k_count; ++a) {
      for (std::size_t b = a + 1; b < k_count; ++b) {
        const double dist = distance(emb, center_index[a], center_index[b]);
        if (p.delta_r - dist > 0.0) add_distance_gradient(emb, center_index[a], center_index[b], dist, w, grad);
      }
    }
  }

  const std::size_t plane = emb.shape().plane();
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto e = embedding_at(emb, center_index[k]);
    double n2 = 0.0;
    for (double v : e) n2 += v * v;
    if (n2 == 0.0) continue;
    const double w = p.beta3 / (kd * std::sqrt(n2));
    for (std::size_t d = 0; d < e.size(); ++d) grad[d * plane + center_index[k]] += w * e[d];
  }
  return grad;
}

double panoptic_loss(double semantic, double center, double embedding, const PanopticLossWeights& w) {
  return w.w1 * semantic + w.w2 * center + w.w3 * embedding;
}

}  // namespace panfuse
