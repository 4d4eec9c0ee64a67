// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <optional>

namespace panfuse {

namespace {

struct SegmentKey {
  std::int32_t class_id;
  std::int32_t instance;

  friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;
};

// Segment a pixel belongs to, if any.
std::optional<SegmentKey> segment_of(const PanopticMask& m, std::size_t i, const std::set<std::int32_t>& stuff) {
  const std::int32_t cls = m.class_map[i];
  if (stuff.contains(cls)) return SegmentKey{cls, 0};
  const std::int32_t inst = m.instance_map[i];
  if (inst == 0) return std::nullopt;
  return SegmentKey{cls, inst};
}

void require_same_dims(const LabelMap& a, const LabelMap& b, const char* op) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                     std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

double iou(const PixelSet& a, const PixelSet& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mean_iou(const LabelMap& pred, const LabelMap& gt, std::size_t num_classes) {
  require_same_dims(pred, gt, "mean_iou");
  std::vector<std::size_t> inter(num_classes, 0);
  std::vector<std::size_t> pred_area(num_classes, 0);
  std::vector<std::size_t> gt_area(num_classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::int32_t p = pred[i];
    const std::int32_t g = gt[i];
    if (p < 0 || g < 0 || static_cast<std::size_t>(p) >= num_classes || static_cast<std::size_t>(g) >= num_classes) {
      throw ValidationError("mean_iou: class id outside [0, " + std::to_string(num_classes) + ") at pixel " +
                            std::to_string(i));
    }
    ++pred_area[static_cast<std::size_t>(p)];
    ++gt_area[static_cast<std::size_t>(g)];
    if (p == g) ++inter[static_cast<std::size_t>(p)];
  }
  double total = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t uni = pred_area[c] + gt_area[c] - inter[c];
    if (uni == 0) continue;
    total += static_cast<double>(inter[c]) / static_cast<double>(uni);
    ++present;
  }
  return present == 0 ? 0.0 : total / static_cast<double>(present);
}

void PanopticQualityAccumulator::add(const PanopticMask& pred, const PanopticMask& gt) {
  require_same_dims(pred.class_map, gt.class_map, "panoptic_quality");
  require_same_dims(pred.instance_map, pred.class_map, "panoptic_quality");
  require_same_dims(gt.instance_map, gt.class_map, "panoptic_quality");

  std::map<SegmentKey, std::size_t> pred_area;
  std::map<SegmentKey, std::size_t> gt_area;
  std::map<std::pair<SegmentKey, SegmentKey>, std::size_t> overlap;  // (gt, pred)
  for (std::size_t i = 0; i < pred.class_map.size(); ++i) {
    const auto ps = segment_of(pred, i, stuff_);
    const auto gs = segment_of(gt, i, stuff_);
    if (ps) ++pred_area[*ps];
    if (gs) ++gt_area[*gs];
    if (ps && gs && ps->class_id == gs->class_id) ++overlap[{*gs, *ps}];
  }

  // IoU > 0.5 makes a match unique on both sides, so no assignment search is needed.
  std::set<SegmentKey> matched_pred;
  std::set<SegmentKey> matched_gt;
  for (const auto& [pair, inter] : overlap) {
    const auto& [gs, ps] = pair;
    const std::size_t uni = gt_area.at(gs) + pred_area.at(ps) - inter;
    const double value = static_cast<double>(inter) / static_cast<double>(uni);
    if (value > 0.5) {
      ClassMatchStats& s = stats_[gs.class_id];
      ++s.tp;
      s.iou_sum += value;
      matched_gt.insert(gs);
      matched_pred.insert(ps);
    }
  }
  for (const auto& [key, area] : gt_area) {
    if (!matched_gt.contains(key)) ++stats_[key.class_id].fn;
  }
  for (const auto& [key, area] : pred_area) {
    if (!matched_pred.contains(key)) ++stats_[key.class_id].fp;
  }
}

void PanopticQualityAccumulator::merge(const PanopticQualityAccumulator& other) {
  for (const auto& [cls, s] : other.stats_) stats_[cls] += s;
}

PQReport PanopticQualityAccumulator::report() const {
  PQReport r;
  for (const auto& [cls, s] : stats_) {
    if (s.tp + s.fp + s.fn == 0) continue;
    const double tp = static_cast<double>(s.tp);
    const double denom = tp + 0.5 * static_cast<double>(s.fp) + 0.5 * static_cast<double>(s.fn);
    ClassQuality q;
    q.class_id = cls;
    q.stats = s;
    q.pq = s.iou_sum / denom;
    q.sq = safe_ratio(s.iou_sum, tp);
    q.rq = tp / denom;
    r.pq += q.pq;
    r.sq += q.sq;
    r.rq += q.rq;
    r.classes.push_back(q);
  }
  if (!r.classes.empty()) {
    const double n = static_cast<double>(r.classes.size());
    r.pq /= n;
    r.sq /= n;
    r.rq /= n;
  }
  return r;
}

PQReport panoptic_quality(const PanopticMask& pred, const PanopticMask& gt, const std::set<std::int32_t>& stuff_classes) {
  PanopticQualityAccumulator acc(stuff_classes);
  acc.add(pred, gt);
  return acc.report();
}

std::string PQReport::to_text() const {
  std::string text;
  char line[256];
  for (const auto& c : classes) {
    std::snprintf(line, sizeof line, "class %d pq %.6f sq %.6f rq %.6f tp %zu fp %zu fn %zu\n", c.class_id, c.pq, c.sq,
                  c.rq, c.stats.tp, c.stats.fp, c.stats.fn);
    text += line;
  }
  std::snprintf(line, sizeof line, "overall pq %.6f sq %.6f rq %.6f classes %zu\n", pq, sq, rq, classes.size());
  text += line;
  return text;
}

}  // namespace panfuse
