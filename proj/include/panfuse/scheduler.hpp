// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "panfuse/rng.hpp"

namespace panfuse {

enum class DropDecision { KeepBoth, DropRGB, DropDepth };

std::string_view to_string(DropDecision d);

/// Modality-drop scheduler state. Threaded through `next_drop` by value.
struct DropState {
  double p_drop = 0.5;
  std::uint64_t n_rgb_dropped = 0;
  std::uint64_t n_depth_dropped = 0;
  Rng rng;

  DropState() = default;
  DropState(double p, std::uint64_t seed) : p_drop(p), rng(seed) {}

  /// Probability that a drop, once decided, removes RGB rather than depth:
  /// (n_depth + 1) / (n_rgb + n_depth + 2). A modality that has been dropped
  /// more often becomes less likely to be dropped again.
  double rgb_share() const;

  friend bool operator==(const DropState&, const DropState&) = default;
};

/// Draws the next decision. With probability p_drop a modality is dropped,
/// chosen with `rgb_share()`; the matching counter is incremented.
std::pair<DropDecision, DropState> next_drop(DropState state);

struct DropSummary {
  double p_drop = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t total_drops = 0;
  std::uint64_t rgb_drops = 0;
  std::uint64_t depth_drops = 0;
  std::uint64_t max_running_imbalance = 0;  // max over steps of |rgb - depth|

  double drop_frequency() const { return steps == 0 ? 0.0 : static_cast<double>(total_drops) / static_cast<double>(steps); }
  /// |rgb - depth| / total drops at the end of the run; 0 with no drops.
  double final_imbalance() const;

  std::string to_text() const;
};

DropSummary simulate(double p_drop, std::uint64_t steps, std::uint64_t seed);

}  // namespace panfuse
