// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/fusion.hpp"

#include <utility>

namespace panfuse {

std::size_t ExcitationParams::channels() const {
  if (layers.empty()) throw ShapeError("excitation stack has no layers");
  const std::size_t c = layers.front().weights.rows();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weights.rows() != c || layer.weights.cols() != c || layer.bias.size() != c) {
      throw ShapeError("excitation layer " + std::to_string(l) + " is not " + std::to_string(c) + "x" +
                       std::to_string(c) + " with a matching bias");
    }
  }
  return c;
}

ExcitationParams ExcitationParams::zeros_like() const {
  ExcitationParams out;
  out.layers.reserve(layers.size());
  for (const auto& layer : layers) {
    out.layers.push_back({Matrix(layer.weights.rows(), layer.weights.cols()), std::vector<double>(layer.bias.size())});
  }
  return out;
}

ExcitationParams ExcitationParams::constant(std::size_t channels, std::size_t depth, double weight, double bias) {
  ExcitationParams out;
  for (std::size_t l = 0; l < depth; ++l) {
    out.layers.push_back({Matrix(channels, channels, weight), std::vector<double>(channels, bias)});
  }
  return out;
}

ExcitationParams ExcitationParams::random(std::size_t channels, std::size_t depth, Rng& rng, double scale) {
  ExcitationParams out = constant(channels, depth, 0.0, 0.0);
  for (auto& layer : out.layers) {
    for (double& w : layer.weights.data()) w = rng.uniform(-scale, scale);
    for (double& b : layer.bias) b = rng.uniform(-scale, scale);
  }
  return out;
}

std::string_view to_string(FusionVariant v) {
  switch (v) {
    case FusionVariant::Addition: return "addition";
    case FusionVariant::SqueezeExcite: return "squeeze-excite";
    case FusionVariant::ExciteOnly: return "excite-only";
    case FusionVariant::ResidualExcite: return "residual-excite";
  }
  return "unknown";
}

std::optional<FusionVariant> parse_fusion_variant(std::string_view name) {
  for (FusionVariant v : kAllFusionVariants) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

namespace {

// Intermediate values of one excitation evaluation, kept for the backward pass.
struct ExciteTrace {
  std::vector<FeatureMap> layer_inputs;
  FeatureMap gate;
};

ExciteTrace excite_trace(const FeatureMap& x, const ExcitationParams& p) {
  if (p.channels() != x.channels()) {
    throw ShapeError("excitation expects " + std::to_string(p.channels()) + " channels, input is " + x.shape().str());
  }
  ExciteTrace trace;
  trace.layer_inputs.reserve(p.layers.size());
  FeatureMap z = x;
  for (const auto& layer : p.layers) {
    FeatureMap next = conv1x1(z, layer.weights, layer.bias);
    trace.layer_inputs.push_back(std::move(z));
    z = std::move(next);
  }
  trace.gate = sigmoid(z);
  return trace;
}

// Pulls dL/d(gate) back through the sigmoid and the convolution stack.
FeatureMap excite_backward(const ExciteTrace& trace, const FeatureMap& grad_gate, const ExcitationParams& p,
                           ExcitationParams& param_grads) {
  FeatureMap dz = FeatureMap::zeros_like(grad_gate);
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const double g = trace.gate[i];
    dz[i] = grad_gate[i] * g * (1.0 - g);
  }
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    Conv1x1Grad g = conv1x1_backward(dz, trace.layer_inputs[l], p.layers[l].weights);
    param_grads.layers[l] = {std::move(g.weights), std::move(g.bias)};
    dz = std::move(g.input);
  }
  return dz;
}

FeatureMap average_pool(const FeatureMap& x) {
  FeatureMap pooled(x.channels(), 1, 1);
  const double inv = 1.0 / static_cast<double>(x.shape().plane());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    double acc = 0.0;
    for (double v : x.channel(c)) acc += v;
    pooled[c] = acc * inv;
  }
  return pooled;
}

FeatureMap apply_channel_gate(const FeatureMap& x, const FeatureMap& gate) {
  FeatureMap out = FeatureMap::zeros_like(x);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const auto src = x.channel(c);
    auto dst = out.channel(c);
    for (std::size_t p = 0; p < src.size(); ++p) dst[p] = gate[c] * src[p];
  }
  return out;
}

bool uses_excitation(FusionVariant v) { return v != FusionVariant::Addition; }

// Validated view of the inputs: present modalities only, with a reference shape.
struct ActiveInputs {
  const FeatureMap* rgb = nullptr;
  const FeatureMap* depth = nullptr;
  Shape shape;
};

ActiveInputs resolve_inputs(const FeatureMap* x_rgb, const FeatureMap* x_depth, const ExcitationParams& p_rgb,
                            const ExcitationParams& p_depth, const FusionConfig& cfg) {
  if (!cfg.rgb_present && !cfg.depth_present) throw PreconditionError("fuse: both modalities are absent");
  if (cfg.rgb_present && x_rgb == nullptr) throw PreconditionError("fuse: RGB flagged present but not supplied");
  if (cfg.depth_present && x_depth == nullptr) throw PreconditionError("fuse: depth flagged present but not supplied");
  if (cfg.lambda < 0.0) throw ValidationError("fuse: lambda must be non-negative");

  ActiveInputs in;
  in.rgb = cfg.rgb_present ? x_rgb : nullptr;
  in.depth = cfg.depth_present ? x_depth : nullptr;
  if (in.rgb && in.depth) require_same_shape(*in.rgb, *in.depth, "fuse");
  in.shape = in.rgb ? in.rgb->shape() : in.depth->shape();

  if (uses_excitation(cfg.variant)) {
    if (in.rgb && p_rgb.channels() != in.shape.channels) {
      throw ShapeError("fuse: RGB excitation has " + std::to_string(p_rgb.channels()) + " channels, features are " +
                       in.shape.str());
    }
    if (in.depth && p_depth.channels() != in.shape.channels) {
      throw ShapeError("fuse: depth excitation has " + std::to_string(p_depth.channels()) +
                       " channels, features are " + in.shape.str());
    }
  }
  return in;
}

// Gated contribution of one modality (before any lambda weighting).
FeatureMap gated_term(const FeatureMap& x, const ExcitationParams& p, FusionVariant variant) {
  if (variant == FusionVariant::SqueezeExcite) return apply_channel_gate(x, squeeze_excite_gate(x, p));
  return elementwise_mul(excite(x, p), x);
}

void accumulate(FeatureMap& acc, const FeatureMap& term, double weight) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * term[i];
}

// Backward of one modality's gated term, given dL/d(term).
FeatureMap gated_term_backward(const FeatureMap& x, const ExcitationParams& p, FusionVariant variant,
                               const FeatureMap& grad_term, ExcitationParams& param_grads) {
  if (variant == FusionVariant::SqueezeExcite) {
    const ExciteTrace trace = excite_trace(average_pool(x), p);
    FeatureMap grad_gate(x.channels(), 1, 1);
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const auto g = grad_term.channel(c);
      const auto v = x.channel(c);
      double acc = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q) acc += g[q] * v[q];
      grad_gate[c] = acc;
    }
    const FeatureMap grad_pooled = excite_backward(trace, grad_gate, p, param_grads);
    FeatureMap grad_x = apply_channel_gate(grad_term, trace.gate);
    const double inv = 1.0 / static_cast<double>(x.shape().plane());
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (double& v : grad_x.channel(c)) v += grad_pooled[c] * inv;
    }
    return grad_x;
  }
  const ExciteTrace trace = excite_trace(x, p);
  FeatureMap grad_x = elementwise_mul(grad_term, trace.gate);
  const FeatureMap grad_through_gate = excite_backward(trace, elementwise_mul(grad_term, x), p, param_grads);
  accumulate(grad_x, grad_through_gate, 1.0);
  return grad_x;
}

}  // namespace

FeatureMap excite(const FeatureMap& x, const ExcitationParams& p) { return excite_trace(x, p).gate; }

FeatureMap squeeze_excite_gate(const FeatureMap& x, const ExcitationParams& p) {
  return excite(average_pool(x), p);
}

FeatureMap fuse(const FeatureMap* x_rgb, const FeatureMap* x_depth, const ExcitationParams& p_rgb,
                const ExcitationParams& p_depth, const FusionConfig& cfg) {
  const ActiveInputs in = resolve_inputs(x_rgb, x_depth, p_rgb, p_depth, cfg);
  FeatureMap out(in.shape.channels, in.shape.height, in.shape.width);

  switch (cfg.variant) {
    case FusionVariant::Addition:
      if (in.rgb) accumulate(out, *in.rgb, 1.0);
      if (in.depth) accumulate(out, *in.depth, 1.0);
      break;
    case FusionVariant::SqueezeExcite:
      if (in.rgb) accumulate(out, gated_term(*in.rgb, p_rgb, cfg.variant), 1.0);
      if (in.depth) accumulate(out, gated_term(*in.depth, p_depth, cfg.variant), 1.0);
      break;
    case FusionVariant::ResidualExcite:
    case FusionVariant::ExciteOnly:
      if (cfg.variant == FusionVariant::ResidualExcite && in.rgb) out = *in.rgb;
      // lambda == 0 must reproduce x_rgb bit-exactly, so skip the excitation
      // terms entirely instead of adding 0 * term.
      if (cfg.lambda != 0.0) {
        if (in.rgb) accumulate(out, gated_term(*in.rgb, p_rgb, cfg.variant), cfg.lambda);
        if (in.depth) accumulate(out, gated_term(*in.depth, p_depth, cfg.variant), cfg.lambda);
      }
      break;
  }
  return out;
}

FusionGradients fuse_backward(const FeatureMap& grad_out, const FeatureMap* x_rgb, const FeatureMap* x_depth,
                              const ExcitationParams& p_rgb, const ExcitationParams& p_depth, const FusionConfig& cfg) {
  const ActiveInputs in = resolve_inputs(x_rgb, x_depth, p_rgb, p_depth, cfg);
  if (grad_out.shape() != in.shape) {
    throw ShapeError("fuse_backward: gradient shape " + grad_out.shape().str() + " does not match features " +
                     in.shape.str());
  }

  FusionGradients grads{FeatureMap(in.shape, std::vector<double>(in.shape.numel())),
                        FeatureMap(in.shape, std::vector<double>(in.shape.numel())), p_rgb.zeros_like(),
                        p_depth.zeros_like()};

  switch (cfg.variant) {
    case FusionVariant::Addition:
      if (in.rgb) grads.rgb = grad_out;
      if (in.depth) grads.depth = grad_out;
      break;
    case FusionVariant::SqueezeExcite:
      if (in.rgb) grads.rgb = gated_term_backward(*in.rgb, p_rgb, cfg.variant, grad_out, grads.params_rgb);
      if (in.depth) grads.depth = gated_term_backward(*in.depth, p_depth, cfg.variant, grad_out, grads.params_depth);
      break;
    case FusionVariant::ResidualExcite:
    case FusionVariant::ExciteOnly: {
      const FeatureMap grad_term = scale(grad_out, cfg.lambda);
      if (in.rgb) grads.rgb = gated_term_backward(*in.rgb, p_rgb, cfg.variant, grad_term, grads.params_rgb);
      if (in.depth) grads.depth = gated_term_backward(*in.depth, p_depth, cfg.variant, grad_term, grads.params_depth);
      if (cfg.variant == FusionVariant::ResidualExcite && in.rgb) accumulate(grads.rgb, grad_out, 1.0);
      break;
    }
  }
  return grads;
}

}  // namespace panfuse
