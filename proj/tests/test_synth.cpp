// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "panfuse/losses.hpp"
#include "panfuse/metrics.hpp"
#include "panfuse/synth.hpp"

using namespace panfuse;

TEST(GenerateTest, GroundTruthIsConsistent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.num_instances = 5;
    const Scene s = generate(spec);
    EXPECT_EQ(s.annotation.num_instances(), 5u);
    EXPECT_NO_THROW(s.annotation.validate());
    std::set<std::int32_t> ids;
    for (std::size_t i = 0; i < s.gt.class_map.size(); ++i) {
      const auto id = s.gt.instance_map[i];
      if (id == 0) {
        EXPECT_TRUE(spec.stuff_classes.contains(s.gt.class_map[i]));
      } else {
        EXPECT_FALSE(spec.stuff_classes.contains(s.gt.class_map[i]));
        ids.insert(id);
      }
    }
    EXPECT_EQ(ids, (std::set<std::int32_t>{1, 2, 3, 4, 5}));
    // Centers are the distance-transform centers, numbered in raster order.
    EXPECT_EQ(s.annotation.centers, center_ground_truth(s.gt.instance_map));
    for (std::size_t k = 1; k < s.annotation.centers.size(); ++k) {
      EXPECT_LT(s.annotation.centers[k - 1].pixel, s.annotation.centers[k].pixel);
    }
  }
}

TEST(GenerateTest, CleanOutputs) {
  SceneSpec spec;
  spec.seed = 3;
  const Scene s = generate(spec);
  EXPECT_NO_THROW(s.out.validate());
  EXPECT_EQ(semantic_argmax(s.out.sem), s.gt.class_map);
  // Single-pixel center peaks exactly at the annotated centers.
  std::size_t peaks = 0;
  for (std::size_t i = 0; i < s.out.cen.size(); ++i) {
    if (s.out.cen[i] != 0.0) {
      ++peaks;
      EXPECT_EQ(s.out.cen[i], 1.0);
      EXPECT_EQ(s.center_target[i], 1.0);
    }
  }
  EXPECT_EQ(peaks, spec.num_instances);
  // Separated embeddings satisfy the repulsion margin.
  const auto terms = embedding_loss(s.out.emb, s.annotation, {0.1, spec.delta_r, 1, 1, 0.001});
  EXPECT_EQ(terms.repulsion, 0.0);
  EXPECT_EQ(terms.attraction, 0.0);
}

TEST(GenerateTest, NoInstances) {
  SceneSpec spec;
  spec.num_instances = 0;
  const Scene s = generate(spec);
  EXPECT_EQ(s.gt.instance_map, LabelMap(spec.height, spec.width, 0));
  for (double v : s.out.cen.data()) EXPECT_EQ(v, 0.0);
}

TEST(GenerateTest, Deterministic) {
  SceneSpec spec;
  spec.seed = 77;
  spec.noise = {0.1, 1.0, 0.2};
  const Scene a = generate(spec);
  const Scene b = generate(spec);
  EXPECT_EQ(a.gt, b.gt);
  EXPECT_EQ(a.out.sem, b.out.sem);
  EXPECT_EQ(a.out.cen, b.out.cen);
  EXPECT_EQ(a.out.emb, b.out.emb);
}

TEST(GenerateTest, GaussianBumpsPeakAtCenters) {
  SceneSpec spec;
  spec.seed = 5;
  spec.noise.center_sigma = 1.5;
  const Scene s = generate(spec);
  EXPECT_NO_THROW(s.out.validate());
  for (const auto& c : s.annotation.centers) EXPECT_EQ(s.out.cen[s.gt.class_map.linear(c.pixel)], 1.0);
}

TEST(GenerateTest, NoisySemanticsStayNormalized) {
  SceneSpec spec;
  spec.seed = 6;
  spec.noise.sem_flip_rate = 0.3;
  const Scene s = generate(spec);
  EXPECT_NO_THROW(s.out.validate());
  EXPECT_NE(semantic_argmax(s.out.sem), s.gt.class_map);
}

TEST(GenerateTest, NoiseFreeRoundTripThroughPipeline) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.height = 48;
    spec.width = 40;
    spec.num_classes = 8;
    spec.num_instances = 6;
    const Scene s = generate(spec);
    const auto mask = panoptic_inference(s.out, {});
    EXPECT_EQ(panoptic_quality(mask, s.gt, spec.stuff_classes).pq, 1.0);
    EXPECT_EQ(mean_iou(mask.class_map, s.gt.class_map, spec.num_classes), 1.0);
  }
}

TEST(GenerateTest, PQDegradesWithEmbeddingNoise) {
  double last = 2.0;
  for (double sigma : {0.0, 0.05, 0.1, 0.2}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SceneSpec spec;
      spec.seed = seed;
      spec.embedding_dim = 8;
      spec.noise.emb_noise_sigma = sigma;
      const Scene s = generate(spec);
      total += panoptic_quality(panoptic_inference(s.out, {}), s.gt, spec.stuff_classes).pq;
    }
    EXPECT_LE(total / 20.0, last + 1e-12) << "sigma " << sigma;
    last = total / 20.0;
  }
}

TEST(GenerateTest, InvalidSpecs) {
  SceneSpec spec;
  spec.stuff_classes = {0, 1, 2, 3, 4, 5};
  EXPECT_THROW(generate(spec), ValidationError);
  spec = {};
  spec.noise.sem_flip_rate = 1.5;
  EXPECT_THROW(generate(spec), ValidationError);
  spec = {};
  spec.height = 4;
  spec.width = 4;
  spec.num_instances = 40;
  EXPECT_THROW(generate(spec), GenerationError);
}
