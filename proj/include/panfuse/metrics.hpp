// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "panfuse/postprocess.hpp"

namespace panfuse {

/// Sorted, duplicate-free linear pixel indices.
using PixelSet = std::vector<std::size_t>;

/// |a n b| / |a u b|; 0 when both are empty.
double iou(const PixelSet& a, const PixelSet& b);

/// Mean IoU over classes that occur in `pred` or `gt`. Ids must lie in [0, num_classes).
double mean_iou(const LabelMap& pred, const LabelMap& gt, std::size_t num_classes);

/// Matching counts for one class; summable across images.
struct ClassMatchStats {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double iou_sum = 0.0;

  ClassMatchStats& operator+=(const ClassMatchStats& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    iou_sum += o.iou_sum;
    return *this;
  }
};

struct ClassQuality {
  std::int32_t class_id = 0;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  ClassMatchStats stats;
};

struct PQReport {
  std::vector<ClassQuality> classes;  // ascending class id, only classes with a segment
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;

  /// One line per class, then an `overall` line.
  std::string to_text() const;
};

/// Accumulates segment matches over any number of images; `report()` divides
/// only once at the end.
class PanopticQualityAccumulator {
 public:
  explicit PanopticQualityAccumulator(std::set<std::int32_t> stuff_classes) : stuff_(std::move(stuff_classes)) {}

  void add(const PanopticMask& pred, const PanopticMask& gt);
  void merge(const PanopticQualityAccumulator& other);
  PQReport report() const;

 private:
  std::set<std::int32_t> stuff_;
  std::map<std::int32_t, ClassMatchStats> stats_;
};

/// Panoptic quality of a single image. Segments are matched when IoU > 0.5.
/// Stuff classes form one segment per class; thing segments are keyed by
/// (class, instance id) and thing pixels with instance 0 belong to no segment.
PQReport panoptic_quality(const PanopticMask& pred, const PanopticMask& gt, const std::set<std::int32_t>& stuff_classes);

}  // namespace panfuse
