// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace panfuse {

namespace {

FeatureMap random_map(std::size_t c, std::size_t h, std::size_t w, Rng& rng, double lo, double hi) {
  FeatureMap m(c, h, w);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

// Flattens one excitation layer's weights or bias into a 1 x 1 x n map so it
// can be probed by finite_diff_gradient.
FeatureMap flatten(std::span<const double> values) {
  return FeatureMap({1, 1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

double max_error(double current, const FeatureMap& analytic, const FeatureMap& numeric) {
  return std::max(current, relative_gradient_error(analytic, numeric));
}

// Checks every parameter of `params` (owned by `problem`) against `analytic`.
double check_params(FusionProblem& problem, ExcitationParams& params, const ExcitationParams& analytic) {
  double worst = 0.0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const auto numeric_w = finite_diff_gradient(
        [&](const FeatureMap& probe) {
          const auto saved = layer.weights;
          std::copy(probe.data().begin(), probe.data().end(), layer.weights.data().begin());
          const double v = problem.loss();
          layer.weights = saved;
          return v;
        },
        flatten(layer.weights.data()), kGradCheckEps);
    worst = max_error(worst, flatten(analytic.layers[l].weights.data()), numeric_w);

    const auto numeric_b = finite_diff_gradient(
        [&](const FeatureMap& probe) {
          const auto saved = layer.bias;
          std::copy(probe.data().begin(), probe.data().end(), layer.bias.begin());
          const double v = problem.loss();
          layer.bias = saved;
          return v;
        },
        flatten(layer.bias), kGradCheckEps);
    worst = max_error(worst, flatten(analytic.layers[l].bias), numeric_b);
  }
  return worst;
}

}  // namespace

double relative_gradient_error(const FeatureMap& analytic, const FeatureMap& numeric) {
  require_same_shape(analytic, numeric, "relative_gradient_error");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

double FusionProblem::loss() const {
  const FeatureMap out = fuse(&rgb, &depth, p_rgb, p_depth, cfg);
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += loss_weights[i] * out[i];
  return acc;
}

FusionProblem random_fusion_problem(FusionVariant variant, Rng& rng, bool allow_missing) {
  const auto c = static_cast<std::size_t>(rng.uniform_int(1, 3));
  const auto h = static_cast<std::size_t>(rng.uniform_int(1, 4));
  const auto w = static_cast<std::size_t>(rng.uniform_int(2, 4));
  const auto depth = static_cast<std::size_t>(rng.uniform_int(1, 2));
  FusionProblem p;
  p.rgb = random_map(c, h, w, rng, -1.5, 1.5);
  p.depth = random_map(c, h, w, rng, -1.5, 1.5);
  p.p_rgb = ExcitationParams::random(c, depth, rng);
  p.p_depth = ExcitationParams::random(c, depth, rng);
  p.cfg.variant = variant;
  p.cfg.lambda = rng.uniform(0.25, 2.0);
  if (allow_missing) {
    const double u = rng.uniform();
    p.cfg.rgb_present = u >= 0.15;
    p.cfg.depth_present = u < 0.15 || u >= 0.3;
  }
  p.loss_weights = random_map(c, h, w, rng, -1.0, 1.0);
  return p;
}

EmbeddingProblem random_embedding_problem(Rng& rng, double margin_gap) {
  for (;;) {
    const auto h = static_cast<std::size_t>(rng.uniform_int(3, 6));
    const auto w = static_cast<std::size_t>(rng.uniform_int(3, 6));
    const auto dim = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto k_count = static_cast<std::int32_t>(rng.uniform_int(0, 3));

    EmbeddingProblem p;
    p.annotation.instance_ids = LabelMap(h, w);
    for (std::size_t i = 0; i < h * w; ++i) {
      p.annotation.instance_ids[i] = static_cast<std::int32_t>(rng.uniform_int(0, k_count));
    }
    for (std::int32_t id = 1; id <= k_count; ++id) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < h * w; ++i) {
        if (p.annotation.instance_ids[i] == id) members.push_back(i);
      }
      if (members.empty()) continue;
      const auto pick = members[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(members.size()) - 1))];
      p.annotation.centers.push_back({id, p.annotation.instance_ids.pixel(pick)});
    }
    // Ids without a surviving member never appear in the map, so the annotation is consistent.
    p.emb = random_map(dim, h, w, rng, -1.0, 1.0);
    p.params.delta_a = rng.uniform(0.05, 0.4);
    p.params.delta_r = rng.uniform(0.8, 2.0);
    p.params.beta1 = rng.uniform(0.5, 2.0);
    p.params.beta2 = rng.uniform(0.5, 2.0);
    p.params.beta3 = rng.uniform(0.001, 0.5);

    // Reject layouts with a distance near a hinge kink or a zero norm.
    const std::size_t plane = h * w;
    auto dist = [&](std::size_t a, std::size_t b) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = p.emb[d * plane + a] - p.emb[d * plane + b];
        d2 += diff * diff;
      }
      return std::sqrt(d2);
    };
    bool clean = true;
    for (const auto& c : p.annotation.centers) {
      const std::size_t ci = p.annotation.instance_ids.linear(c.pixel);
      double n2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) n2 += p.emb[d * plane + ci] * p.emb[d * plane + ci];
      if (std::sqrt(n2) < margin_gap) clean = false;
      for (std::size_t i = 0; i < plane; ++i) {
        if (p.annotation.instance_ids[i] != c.id || i == ci) continue;
        if (std::abs(dist(ci, i) - p.params.delta_a) < margin_gap || dist(ci, i) < margin_gap) clean = false;
      }
      for (const auto& other : p.annotation.centers) {
        if (other.id <= c.id) continue;
        const double d = dist(ci, p.annotation.instance_ids.linear(other.pixel));
        if (std::abs(d - p.params.delta_r) < margin_gap || d < margin_gap) clean = false;
      }
    }
    if (clean) return p;
  }
}

FocalProblem random_focal_problem(Rng& rng) {
  const auto h = static_cast<std::size_t>(rng.uniform_int(1, 5));
  const auto w = static_cast<std::size_t>(rng.uniform_int(1, 5));
  FocalProblem p;
  p.pred = random_map(1, h, w, rng, 0.02, 0.98);
  p.target = LabelMap(h, w);
  for (std::size_t i = 0; i < h * w; ++i) p.target[i] = rng.uniform() < 0.4 ? 1 : 0;
  p.params.alpha = rng.uniform(0.05, 0.95);
  p.params.tau = static_cast<double>(rng.uniform_int(0, 4)) * 0.75;
  return p;
}

GradCheckResult check_fusion_gradients(FusionVariant variant, std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  GradCheckResult result{"fusion/" + std::string(to_string(variant)), instances, 0.0};
  for (std::size_t n = 0; n < instances; ++n) {
    FusionProblem problem = random_fusion_problem(variant, rng);
    const FeatureMap grad_out = problem.loss_weights;
    const FusionGradients analytic =
        fuse_backward(grad_out, &problem.rgb, &problem.depth, problem.p_rgb, problem.p_depth, problem.cfg);

    const auto numeric_rgb = finite_diff_gradient(
        [&](const FeatureMap& probe) {
          FusionProblem copy = problem;
          copy.rgb = probe;
          return copy.loss();
        },
        problem.rgb, kGradCheckEps);
    const auto numeric_depth = finite_diff_gradient(
        [&](const FeatureMap& probe) {
          FusionProblem copy = problem;
          copy.depth = probe;
          return copy.loss();
        },
        problem.depth, kGradCheckEps);
    double worst = result.max_relative_error;
    worst = max_error(worst, analytic.rgb, numeric_rgb);
    worst = max_error(worst, analytic.depth, numeric_depth);
    worst = std::max(worst, check_params(problem, problem.p_rgb, analytic.params_rgb));
    worst = std::max(worst, check_params(problem, problem.p_depth, analytic.params_depth));
    result.max_relative_error = worst;
  }
  return result;
}

GradCheckResult check_focal_gradients(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  GradCheckResult result{"loss/focal", instances, 0.0};
  for (std::size_t n = 0; n < instances; ++n) {
    const FocalProblem p = random_focal_problem(rng);
    const auto analytic = focal_loss_backward(p.pred, p.target, p.params);
    const auto numeric = finite_diff_gradient(
        [&](const FeatureMap& probe) { return focal_loss(probe, p.target, p.params); }, p.pred, kGradCheckEps);
    result.max_relative_error = max_error(result.max_relative_error, analytic, numeric);
  }
  return result;
}

GradCheckResult check_embedding_gradients(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  GradCheckResult result{"loss/embedding", instances, 0.0};
  for (std::size_t n = 0; n < instances; ++n) {
    const EmbeddingProblem p = random_embedding_problem(rng);
    const auto analytic = embedding_loss_backward(p.emb, p.annotation, p.params);
    const auto numeric = finite_diff_gradient(
        [&](const FeatureMap& probe) { return embedding_loss(probe, p.annotation, p.params).total; }, p.emb,
        kGradCheckEps);
    result.max_relative_error = max_error(result.max_relative_error, analytic, numeric);
  }
  return result;
}

}  // namespace panfuse
