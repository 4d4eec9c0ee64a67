// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/scheduler.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "panfuse/error.hpp"

namespace panfuse {

std::string_view to_string(DropDecision d) {
  switch (d) {
    case DropDecision::KeepBoth: return "keep-both";
    case DropDecision::DropRGB: return "drop-rgb";
    case DropDecision::DropDepth: return "drop-depth";
  }
  return "unknown";
}

double DropState::rgb_share() const {
  return static_cast<double>(n_depth_dropped + 1) / static_cast<double>(n_rgb_dropped + n_depth_dropped + 2);
}

std::pair<DropDecision, DropState> next_drop(DropState state) {
  if (!(state.p_drop >= 0.0 && state.p_drop <= 1.0)) throw ValidationError("p_drop must lie in [0, 1]");
  // The drop event is decided first so its marginal probability is exactly p_drop.
  if (!(state.rng.uniform() < state.p_drop)) return {DropDecision::KeepBoth, std::move(state)};
  if (state.rng.uniform() < state.rgb_share()) {
    ++state.n_rgb_dropped;
    return {DropDecision::DropRGB, std::move(state)};
  }
  ++state.n_depth_dropped;
  return {DropDecision::DropDepth, std::move(state)};
}

double DropSummary::final_imbalance() const {
  if (total_drops == 0) return 0.0;
  const auto diff = rgb_drops > depth_drops ? rgb_drops - depth_drops : depth_drops - rgb_drops;
  return static_cast<double>(diff) / static_cast<double>(total_drops);
}

DropSummary simulate(double p_drop, std::uint64_t steps, std::uint64_t seed) {
  if (steps == 0) throw ValidationError("simulate: steps must be at least 1");
  DropState state(p_drop, seed);
  DropSummary s;
  s.p_drop = p_drop;
  s.steps = steps;
  s.seed = seed;
  for (std::uint64_t i = 0; i < steps; ++i) {
    DropDecision decision;
    std::tie(decision, state) = next_drop(std::move(state));
    const auto r = state.n_rgb_dropped;
    const auto d = state.n_depth_dropped;
    s.max_running_imbalance = std::max(s.max_running_imbalance, r > d ? r - d : d - r);
  }
  s.rgb_drops = state.n_rgb_dropped;
  s.depth_drops = state.n_depth_dropped;
  s.total_drops = s.rgb_drops + s.depth_drops;
  return s;
}

std::string DropSummary::to_text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "p_drop %.6f\nsteps %llu\nseed %llu\ntotal_drops %llu\nrgb_drops %llu\ndepth_drops %llu\n"
                "drop_frequency %.6f\nrgb_fraction %.6f\nfinal_imbalance %.6f\nmax_running_imbalance %llu\n",
                p_drop, static_cast<unsigned long long>(steps), static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(total_drops), static_cast<unsigned long long>(rgb_drops),
                static_cast<unsigned long long>(depth_drops), drop_frequency(),
                total_drops == 0 ? 0.0 : static_cast<double>(rgb_drops) / static_cast<double>(total_drops),
                final_imbalance(), static_cast<unsigned long long>(max_running_imbalance));
  return buf;
}

}  // namespace panfuse
