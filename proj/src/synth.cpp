// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "panfuse/rng.hpp"

namespace panfuse {

namespace {

constexpr int kPlacementAttempts = 500;

std::vector<std::int32_t> thing_classes(const SceneSpec& spec) {
  std::vector<std::int32_t> things;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const auto id = static_cast<std::int32_t>(c);
    if (!spec.stuff_classes.contains(id)) things.push_back(id);
  }
  return things;
}

// Pixels of a rectangle or inscribed ellipse with the given bounding box.
std::vector<Pixel> rasterize(int top, int left, int box_h, int box_w, bool ellipse) {
  std::vector<Pixel> pixels;
  const double cr = top + (box_h - 1) / 2.0;
  const double cc = left + (box_w - 1) / 2.0;
  const double ar = box_h / 2.0;
  const double ac = box_w / 2.0;
  for (int r = top; r < top + box_h; ++r) {
    for (int c = left; c < left + box_w; ++c) {
      if (ellipse) {
        const double u = (r - cr) / ar;
        const double v = (c - cc) / ac;
        if (u * u + v * v > 1.0) continue;
      }
      pixels.push_back({r, c});
    }
  }
  return pixels;
}

// Embedding target of instance `k`: a point on coordinate axis k mod D at
// radius 2 * delta_r * (1 + k / D). Distinct instances are then at least
// 2 * delta_r apart and at least 2 * delta_r from the origin.
std::vector<double> instance_embedding(std::size_t k, std::size_t dim, double delta_r) {
  std::vector<double> e(dim, 0.0);
  e[k % dim] = 2.0 * delta_r * (1.0 + static_cast<double>(k / dim));
  return e;
}

}  // namespace

void SceneSpec::validate() const {
  if (height == 0 || width == 0) throw ValidationError("scene: height and width must be positive");
  if (num_classes == 0) throw ValidationError("scene: num_classes must be positive");
  if (embedding_dim == 0) throw ValidationError("scene: embedding_dim must be positive");
  if (stuff_classes.empty()) throw ValidationError("scene: at least one stuff class is needed for the background");
  for (std::int32_t c : stuff_classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw ValidationError("scene: stuff class " + std::to_string(c) + " outside [0, num_classes)");
    }
  }
  if (num_instances > 0 && stuff_classes.size() == num_classes) {
    throw ValidationError("scene: instances requested but every class is stuff");
  }
  if (!(noise.sem_flip_rate >= 0.0 && noise.sem_flip_rate <= 1.0)) throw ValidationError("scene: sem_flip_rate outside [0,1]");
  if (!(noise.center_sigma >= 0.0) || !(noise.emb_noise_sigma >= 0.0)) {
    throw ValidationError("scene: noise sigmas must be non-negative");
  }
  if (!(delta_r > 0.0)) throw ValidationError("scene: delta_r must be positive");
  if (num_instances > 65535) throw ValidationError("scene: too many instances");
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int h = static_cast<int>(spec.height);
  const int w = static_cast<int>(spec.width);
  const std::vector<std::int32_t> stuff(spec.stuff_classes.begin(), spec.stuff_classes.end());
  const std::vector<std::int32_t> things = thing_classes(spec);

  // Background: horizontal bands of the stuff classes (wall above floor).
  LabelMap class_map(spec.height, spec.width);
  for (int r = 0; r < h; ++r) {
    const auto band = static_cast<std::size_t>(r) * stuff.size() / spec.height;
    for (int c = 0; c < w; ++c) class_map.at({r, c}) = stuff[band];
  }

  LabelMap placement(spec.height, spec.width);
  const int max_h = std::max(std::min(3, h), h / 3);
  const int max_w = std::max(std::min(3, w), w / 3);
  for (std::size_t k = 0; k < spec.num_instances; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const int box_h = static_cast<int>(rng.uniform_int(std::min(2, h), max_h));
      const int box_w = static_cast<int>(rng.uniform_int(std::min(2, w), max_w));
      const int top = static_cast<int>(rng.uniform_int(0, h - box_h));
      const int left = static_cast<int>(rng.uniform_int(0, w - box_w));
      const bool ellipse = rng.uniform() < 0.5;
      const auto pixels = rasterize(top, left, box_h, box_w, ellipse);
      if (pixels.empty()) continue;
      const bool free = std::all_of(pixels.begin(), pixels.end(), [&](Pixel p) { return placement.at(p) == 0; });
      if (!free) continue;
      const std::int32_t cls = things[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(things.size()) - 1))];
      for (Pixel p : pixels) {
        placement.at(p) = static_cast<std::int32_t>(k + 1);
        class_map.at(p) = cls;
      }
      placed = true;
    }
    if (!placed) {
      throw GenerationError("could not place instance " + std::to_string(k + 1) + " of " +
                            std::to_string(spec.num_instances) + " without overlap in a " + std::to_string(h) + "x" +
                            std::to_string(w) + " scene");
    }
  }

  // Number instances 1..K in raster order of their interior centers.
  auto centers = center_ground_truth(placement);
  std::sort(centers.begin(), centers.end(),
            [](const InstanceCenter& a, const InstanceCenter& b) { return a.pixel < b.pixel; });
  std::vector<std::int32_t> renumber(spec.num_instances + 1, 0);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    renumber[static_cast<std::size_t>(centers[k].id)] = static_cast<std::int32_t>(k + 1);
    centers[k].id = static_cast<std::int32_t>(k + 1);
  }
  LabelMap instance_map(spec.height, spec.width);
  for (std::size_t i = 0; i < placement.size(); ++i) instance_map[i] = renumber[static_cast<std::size_t>(placement[i])];

  Scene scene;
  scene.gt = {class_map, instance_map};
  scene.annotation = {instance_map, centers};

  const std::size_t plane = spec.height * spec.width;
  scene.out.sem = FeatureMap(spec.num_classes, spec.height, spec.width);
  for (std::size_t i = 0; i < plane; ++i) {
    auto label = static_cast<std::size_t>(class_map[i]);
    if (spec.num_classes > 1 && rng.uniform() < spec.noise.sem_flip_rate) {
      // Any class except the true one, uniformly.
      const auto offset = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(spec.num_classes) - 1));
      label = (label + offset) % spec.num_classes;
    }
    scene.out.sem[label * plane + i] = 1.0;
  }

  scene.out.cen = FeatureMap(1, spec.height, spec.width);
  scene.center_target = FeatureMap(1, spec.height, spec.width);
  const double sigma = spec.noise.center_sigma;
  for (const auto& c : centers) {
    scene.center_target(0, c.pixel.row, c.pixel.col) = 1.0;
    if (sigma == 0.0) {
      scene.out.cen(0, c.pixel.row, c.pixel.col) = 1.0;
      continue;
    }
    // Bump truncated at 3 sigma.
    const double cutoff = 3.0 * sigma;
    const int radius = static_cast<int>(std::ceil(cutoff));
    for (int r = c.pixel.row - radius; r <= c.pixel.row + radius; ++r) {
      for (int q = c.pixel.col - radius; q <= c.pixel.col + radius; ++q) {
        if (!class_map.contains({r, q})) continue;
        const double d2 = double(r - c.pixel.row) * (r - c.pixel.row) + double(q - c.pixel.col) * (q - c.pixel.col);
        if (d2 > cutoff * cutoff) continue;
        double& v = scene.out.cen(0, r, q);
        v = std::max(v, std::exp(-d2 / (2.0 * sigma * sigma)));
      }
    }
  }

  const std::size_t dim = spec.embedding_dim;
  scene.out.emb = FeatureMap(dim, spec.height, spec.width);
  std::vector<std::vector<double>> targets;
  for (std::size_t k = 0; k < centers.size(); ++k) targets.push_back(instance_embedding(k, dim, spec.delta_r));
  for (std::size_t i = 0; i < plane; ++i) {
    const std::int32_t id = instance_map[i];
    for (std::size_t d = 0; d < dim; ++d) {
      double v = id == 0 ? 0.0 : targets[static_cast<std::size_t>(id - 1)][d];
      if (spec.noise.emb_noise_sigma > 0.0) v += rng.normal(0.0, spec.noise.emb_noise_sigma);
      scene.out.emb[d * plane + i] = v;
    }
  }
  return scene;
}

}  // namespace panfuse
