// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference computations used only by tests. They index through
// (c, h, w) accessors and explicit pixel sets, never through the library's
// kernels, so they stay independent of the code they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "panfuse/losses.hpp"
#include "panfuse/postprocess.hpp"
#include "panfuse/rng.hpp"
#include "panfuse/tensor.hpp"

namespace panfuse::oracle {

inline FeatureMap random_map(std::size_t c, std::size_t h, std::size_t w, Rng& rng, double lo = -1.0, double hi = 1.0) {
  FeatureMap m(c, h, w);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

inline FeatureMap conv1x1(const FeatureMap& x, const Matrix& w, const std::vector<double>& b) {
  FeatureMap out(w.rows(), x.height(), x.width());
  for (std::size_t r = 0; r < x.height(); ++r) {
    for (std::size_t c = 0; c < x.width(); ++c) {
      std::vector<double> pixel(x.channels());
      for (std::size_t i = 0; i < x.channels(); ++i) pixel[i] = x(i, r, c);
      for (std::size_t o = 0; o < w.rows(); ++o) {
        double dot = b[o];
        for (std::size_t i = 0; i < pixel.size(); ++i) dot += w(o, i) * pixel[i];
        out(o, r, c) = dot;
      }
    }
  }
  return out;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double cross_entropy(const FeatureMap& probs, const LabelMap& labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < probs.height(); ++r) {
    for (std::size_t c = 0; c < probs.width(); ++c) {
      const auto label = static_cast<std::size_t>(labels.at({int(r), int(c)}));
      total -= std::log(std::max(probs(label, r, c), 1e-12));
    }
  }
  return total / double(probs.height() * probs.width());
}

inline double focal(const FeatureMap& pred, const LabelMap& target, double alpha, double tau) {
  double total = 0.0;
  for (std::size_t r = 0; r < pred.height(); ++r) {
    for (std::size_t c = 0; c < pred.width(); ++c) {
      const double y = std::clamp(pred(0, r, c), 1e-12, 1.0 - 1e-12);
      if (target.at({int(r), int(c)}) == 1) {
        total += -alpha * std::pow(1.0 - y, tau) * std::log(y);
      } else {
        total += -(1.0 - alpha) * std::pow(y, tau) * std::log(1.0 - y);
      }
    }
  }
  return total / double(pred.height() * pred.width());
}

inline std::vector<double> embedding_at(const FeatureMap& emb, Pixel p) {
  std::vector<double> e(emb.channels());
  for (std::size_t d = 0; d < emb.channels(); ++d) e[d] = emb(d, std::size_t(p.row), std::size_t(p.col));
  return e;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d);
}

/// Hinged embedding loss by direct loops over all pixels and all ordered
/// center pairs (the ordered-pair mean equals the unordered-pair mean).
inline EmbeddingLossTerms embedding(const FeatureMap& emb, const InstanceAnnotation& ann, const EmbeddingLossParams& p) {
  EmbeddingLossTerms t;
  const std::size_t k_count = ann.centers.size();
  if (k_count == 0) return t;
  for (const auto& center : ann.centers) {
    const auto ek = embedding_at(emb, center.pixel);
    double acc = 0.0;
    std::size_t members = 0;
    for (int r = 0; r < int(emb.height()); ++r) {
      for (int c = 0; c < int(emb.width()); ++c) {
        if (ann.instance_ids.at({r, c}) != center.id) continue;
        ++members;
        acc += std::max(0.0, distance(ek, embedding_at(emb, {r, c})) - p.delta_a);
      }
    }
    t.attraction += acc / double(members);
  }
  t.attraction /= double(k_count);
  if (k_count > 1) {
    double acc = 0.0;
    for (std::size_t a = 0; a < k_count; ++a) {
      for (std::size_t b = 0; b < k_count; ++b) {
        if (a == b) continue;
        acc += std::max(0.0, p.delta_r - distance(embedding_at(emb, ann.centers[a].pixel),
                                                  embedding_at(emb, ann.centers[b].pixel)));
      }
    }
    t.repulsion = acc / double(k_count * (k_count - 1));
  }
  for (const auto& center : ann.centers) t.regularization += norm(embedding_at(emb, center.pixel));
  t.regularization /= double(k_count);
  t.total = p.beta1 * t.attraction + p.beta2 * t.repulsion + p.beta3 * t.regularization;
  return t;
}

/// Segments as explicit pixel sets.
inline std::map<std::pair<int, int>, std::set<std::size_t>> segments(const PanopticMask& m,
                                                                      const std::set<std::int32_t>& stuff) {
  std::map<std::pair<int, int>, std::set<std::size_t>> segs;
  for (std::size_t i = 0; i < m.class_map.size(); ++i) {
    const int cls = m.class_map[i];
    if (stuff.contains(cls)) {
      segs[{cls, 0}].insert(i);
    } else if (m.instance_map[i] != 0) {
      segs[{cls, m.instance_map[i]}].insert(i);
    }
  }
  return segs;
}

inline double set_iou(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::size_t inter = 0;
  for (auto x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct OraclePQ {
  std::map<int, double> pq;
  double overall = 0.0;
};

/// All-pairs PQ with explicit set intersections.
inline OraclePQ panoptic_quality(const PanopticMask& pred, const PanopticMask& gt, const std::set<std::int32_t>& stuff) {
  const auto ps = segments(pred, stuff);
  const auto gs = segments(gt, stuff);
  std::map<int, double> iou_sum;
  std::map<int, double> tp, fp, fn;
  std::set<std::pair<int, int>> matched_p, matched_g;
  for (const auto& [gk, gset] : gs) {
    for (const auto& [pk, pset] : ps) {
      if (gk.first != pk.first) continue;
      const double v = set_iou(gset, pset);
      if (v > 0.5) {
        iou_sum[gk.first] += v;
        tp[gk.first] += 1;
        matched_g.insert(gk);
        matched_p.insert(pk);
      }
    }
  }
  std::set<int> classes;
  for (const auto& [gk, s] : gs) {
    classes.insert(gk.first);
    if (!matched_g.contains(gk)) fn[gk.first] += 1;
  }
  for (const auto& [pk, s] : ps) {
    classes.insert(pk.first);
    if (!matched_p.contains(pk)) fp[pk.first] += 1;
  }
  OraclePQ out;
  for (int c : classes) {
    out.pq[c] = iou_sum[c] / (tp[c] + 0.5 * fp[c] + 0.5 * fn[c]);
    out.overall += out.pq[c];
  }
  if (!classes.empty()) out.overall /= double(classes.size());
  return out;
}

/// Brute-force city-block distance to the nearest pixel outside the instance.
inline int boundary_distance(const LabelMap& ids, Pixel p) {
  const int h = int(ids.height());
  const int w = int(ids.width());
  int best = std::min({p.row + 1, p.col + 1, h - p.row, w - p.col});
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (ids.at({r, c}) != ids.at(p)) best = std::min(best, std::abs(r - p.row) + std::abs(c - p.col));
    }
  }
  return best;
}

}  // namespace panfuse::oracle
