// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "panfuse/kernels.hpp"

namespace panfuse {

namespace {

void require_plane(const FeatureMap& map, std::size_t height, std::size_t width, const char* what) {
  if (map.height() != height || map.width() != width) {
    throw ShapeError(std::string(what) + " " + map.shape().str() + " does not match " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
}

double embedding_distance(const FeatureMap& emb, std::size_t a, std::size_t b) {
  const std::size_t plane = emb.shape().plane();
  double d2 = 0.0;
  for (std::size_t d = 0; d < emb.channels(); ++d) {
    const double diff = emb[d * plane + a] - emb[d * plane + b];
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

// Union-find over linear pixel indices with union by smaller root, so the
// representative of each component is its lowest index.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

void DecoderOutputs::validate() const {
  if (sem.size() == 0) throw ShapeError("decoder outputs: empty semantic map");
  if (cen.channels() != 1) throw ShapeError("decoder outputs: center map must have one channel, got " + cen.shape().str());
  require_plane(cen, sem.height(), sem.width(), "decoder outputs: center map");
  require_plane(emb, sem.height(), sem.width(), "decoder outputs: embedding map");
  if (emb.channels() == 0) throw ShapeError("decoder outputs: embedding map has no channels");
  for (double v : cen.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("decoder outputs: center probability outside [0,1]");
  }
  if (!sem.all_finite() || !emb.all_finite()) throw ValidationError("decoder outputs: non-finite values");
  const std::size_t plane = sem.shape().plane();
  for (std::size_t i = 0; i < plane; ++i) {
    double mass = 0.0;
    for (std::size_t c = 0; c < sem.channels(); ++c) mass += sem[c * plane + i];
    if (std::abs(mass - 1.0) > 1e-6) {
      throw ValidationError("decoder outputs: semantic probabilities sum to " + std::to_string(mass) +
                            " at pixel " + std::to_string(i));
    }
  }
}

LabelMap semantic_argmax(const FeatureMap& sem) {
  LabelMap labels(sem.height(), sem.width());
  const std::size_t plane = sem.shape().plane();
  for (std::size_t i = 0; i < plane; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < sem.channels(); ++c) {
      if (sem[c * plane + i] > sem[best * plane + i]) best = c;
    }
    labels[i] = static_cast<std::int32_t>(best);
  }
  return labels;
}

std::vector<Pixel> threshold_centers(const FeatureMap& cen, const LabelMap& sem_argmax, const PostprocessConfig& cfg) {
  require_plane(cen, sem_argmax.height(), sem_argmax.width(), "center map");
  std::vector<Pixel> omega;
  for (std::size_t i = 0; i < sem_argmax.size(); ++i) {
    if (cen[i] >= cfg.delta_cen && cfg.is_thing(sem_argmax[i])) omega.push_back(sem_argmax.pixel(i));
  }
  return omega;
}

std::vector<Blob> extract_blobs(const std::vector<Pixel>& omega, const LabelMap& sem_argmax, const FeatureMap& emb,
                                const FeatureMap& cen, const PostprocessConfig& cfg) {
  require_plane(emb, sem_argmax.height(), sem_argmax.width(), "embedding map");
  require_plane(cen, sem_argmax.height(), sem_argmax.width(), "center map");

  const std::size_t n = sem_argmax.size();
  std::vector<char> member(n, 0);
  for (const Pixel& p : omega) member[sem_argmax.linear(p)] = 1;

  DisjointSets sets(n);
  auto try_join = [&](std::size_t a, std::size_t b) {
    if (member[b] && sem_argmax[a] == sem_argmax[b] && embedding_distance(emb, a, b) < cfg.delta_emb) sets.unite(a, b);
  };
  const std::size_t width = sem_argmax.width();
  for (std::size_t i = 0; i < n; ++i) {
    if (!member[i]) continue;
    // Right and down neighbours cover every 4-adjacent pair once.
    if ((i % width) + 1 < width) try_join(i, i + 1);
    if (i + width < n) try_join(i, i + width);
  }

  std::map<std::size_t, std::size_t> blob_of_root;
  std::vector<Blob> blobs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!member[i]) continue;
    const std::size_t root = sets.find(i);
    auto [it, inserted] = blob_of_root.emplace(root, blobs.size());
    if (inserted) blobs.push_back({{}, sem_argmax[i], sem_argmax.pixel(i)});
    Blob& blob = blobs[it->second];
    blob.pixels.push_back(sem_argmax.pixel(i));
    // Raster scan: strict > keeps the earliest pixel on ties.
    if (cen[i] > cen[sem_argmax.linear(blob.peak)]) blob.peak = sem_argmax.pixel(i);
  }
  return blobs;
}

std::vector<Center> nms_centers(const std::vector<Blob>& blobs) {
  std::vector<Center> centers;
  centers.reserve(blobs.size());
  for (const Blob& blob : blobs) centers.push_back({blob.peak, blob.class_id});
  std::sort(centers.begin(), centers.end(), [](const Center& a, const Center& b) { return a.pixel < b.pixel; });
  return centers;
}

PanopticMask assign_pixels(const std::vector<Center>& centers, const LabelMap& sem_argmax, const FeatureMap& emb,
                           const PostprocessConfig& cfg) {
  require_plane(emb, sem_argmax.height(), sem_argmax.width(), "embedding map");
  PanopticMask mask{sem_argmax, LabelMap(sem_argmax.height(), sem_argmax.width())};
  if (centers.empty()) return mask;

  const std::size_t plane = emb.shape().plane();
  std::vector<std::vector<double>> center_embeddings;
  std::vector<kernels::CenterRef> refs;
  center_embeddings.reserve(centers.size());
  for (const Center& c : centers) {
    const std::size_t at = sem_argmax.linear(c.pixel);
    std::vector<double>& e = center_embeddings.emplace_back(emb.channels());
    for (std::size_t d = 0; d < emb.channels(); ++d) e[d] = emb[d * plane + at];
  }
  for (std::size_t k = 0; k < centers.size(); ++k) {
    // Stuff-class centers never match any pixel.
    const std::int32_t cls = cfg.is_thing(centers[k].class_id) ? centers[k].class_id : -1;
    refs.push_back({cls, center_embeddings[k]});
  }

  std::vector<std::int32_t> assignment(plane);
  kernels::omp::nearest_center(sem_argmax.data(), emb.data(), {emb.channels(), plane}, refs, cfg.theta, assignment);

  // Compact ids so that only centers that own pixels get a number.
  std::vector<std::int32_t> used(centers.size(), 0);
  for (std::int32_t k : assignment) {
    if (k >= 0) used[static_cast<std::size_t>(k)] = 1;
  }
  std::vector<std::int32_t> id_of(centers.size(), 0);
  std::int32_t next = 1;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    if (used[k]) id_of[k] = next++;
  }
  for (std::size_t i = 0; i < plane; ++i) {
    if (assignment[i] >= 0 && cfg.is_thing(sem_argmax[i])) {
      mask.instance_map[i] = id_of[static_cast<std::size_t>(assignment[i])];
    }
  }
  return mask;
}

PanopticMask panoptic_inference(const DecoderOutputs& out, const PostprocessConfig& cfg) {
  out.validate();
  const LabelMap classes = semantic_argmax(out.sem);
  const auto omega = threshold_centers(out.cen, classes, cfg);
  const auto blobs = extract_blobs(omega, classes, out.emb, out.cen, cfg);
  return assign_pixels(nms_centers(blobs), classes, out.emb, cfg);
}

Grid<std::int32_t> instance_distance_transform(const LabelMap& instance_map) {
  const int h = static_cast<int>(instance_map.height());
  const int w = static_cast<int>(instance_map.width());
  Grid<std::int32_t> dist(instance_map.height(), instance_map.width());
  // Neighbour value seen from pixel p: a pixel of a different id, or outside
  // the image, is at distance 0.
  auto neighbour = [&](Pixel p, int dr, int dc) -> std::int32_t {
    const Pixel q{p.row + dr, p.col + dc};
    if (!instance_map.contains(q) || instance_map.at(q) != instance_map.at(p)) return 0;
    return dist.at(q);
  };
  constexpr std::int32_t kFar = std::numeric_limits<std::int32_t>::max() / 2;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Pixel p{r, c};
      if (instance_map.at(p) == 0) continue;
      dist.at(p) = kFar;
      dist.at(p) = std::min({dist.at(p), neighbour(p, -1, 0) + 1, neighbour(p, 0, -1) + 1});
    }
  }
  for (int r = h - 1; r >= 0; --r) {
    for (int c = w - 1; c >= 0; --c) {
      const Pixel p{r, c};
      if (instance_map.at(p) == 0) continue;
      dist.at(p) = std::min({dist.at(p), neighbour(p, 1, 0) + 1, neighbour(p, 0, 1) + 1});
    }
  }
  return dist;
}

std::vector<InstanceCenter> center_ground_truth(const LabelMap& instance_map) {
  const auto dist = instance_distance_transform(instance_map);
  std::map<std::int32_t, std::size_t> best;
  for (std::size_t i = 0; i < instance_map.size(); ++i) {
    const std::int32_t id = instance_map[i];
    if (id == 0) continue;
    auto [it, inserted] = best.emplace(id, i);
    if (!inserted && dist[i] > dist[it->second]) it->second = i;
  }
  std::vector<InstanceCenter> centers;
  centers.reserve(best.size());
  for (const auto& [id, index] : best) centers.push_back({id, instance_map.pixel(index)});
  return centers;
}

}  // namespace panfuse
