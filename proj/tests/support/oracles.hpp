// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used to check the metric code.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "popsweeper/evaluation.hpp"

namespace popsweeper::testing {

// Counts covered cells on a grid of the given step. Exact for boxes whose
// corners lie on the grid.
inline double grid_iou(const BoundingBox& a, const BoundingBox& b, double step) {
  const double lo_x = std::min(a.x1, b.x1), hi_x = std::max(a.x2, b.x2);
  const double lo_y = std::min(a.y1, b.y1), hi_y = std::max(a.y2, b.y2);
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (double y = lo_y + step / 2; y < hi_y; y += step) {
    for (double x = lo_x + step / 2; x < hi_x; x += step) {
      const bool in_a = a.contains(x, y);
      const bool in_b = b.contains(x, y);
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct OracleRanked {
  double confidence;
  bool tp;
};

// Greedy matching written out independently of the library.
inline std::vector<OracleRanked> oracle_match(const DetectionCorpus& corpus, double t) {
  std::vector<OracleRanked> out;
  for (std::size_t f = 0; f < corpus.predictions.size(); ++f) {
    std::vector<Detection> preds = corpus.predictions[f];
    std::stable_sort(preds.begin(), preds.end(),
                     [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
    std::vector<BoundingBox> free_gt = corpus.ground_truth[f];
    for (const auto& p : preds) {
      auto best = free_gt.end();
      double best_iou = -1.0;
      for (auto it = free_gt.begin(); it != free_gt.end(); ++it) {
        const double w = std::max(0.0, std::min(p.box.x2, it->x2) - std::max(p.box.x1, it->x1));
        const double h = std::max(0.0, std::min(p.box.y2, it->y2) - std::max(p.box.y1, it->y1));
        const double inter = w * h;
        const double u = p.box.area() + it->area() - inter;
        const double v = u > 0 ? inter / u : 0.0;
        if (v > best_iou) {
          best_iou = v;
          best = it;
        }
      }
      const bool hit = best != free_gt.end() && best_iou >= t;
      if (hit) free_gt.erase(best);
      out.push_back({p.confidence, hit});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const OracleRanked& a, const OracleRanked& b) { return a.confidence > b.confidence; });
  return out;
}

// Enumerates every cut-off of the ranked list, recounting precision from
// scratch at each point. Recall only moves at true positives, by 1/G.
inline double oracle_ap(const std::vector<OracleRanked>& ranked, std::int64_t g, bool envelope) {
  const std::size_t n = ranked.size();
  auto precision_at = [&](std::size_t k) {
    std::int64_t tp = 0;
    for (std::size_t i = 0; i <= k; ++i) tp += ranked[i].tp;
    return static_cast<double>(tp) / static_cast<double>(k + 1);
  };
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!ranked[k].tp) continue;
    double p = precision_at(k);
    if (envelope) {
      for (std::size_t j = k + 1; j < n; ++j) p = std::max(p, precision_at(j));
    }
    sum += p;
  }
  return sum / static_cast<double>(g);
}

inline BoundingBox random_box(std::mt19937& rng, double extent) {
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> size(1.0, extent / 2);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + size(rng), y + size(rng)};
}

// A corpus with jittered copies of the ground truth plus clutter, so IoUs
// spread over the whole range.
inline DetectionCorpus random_corpus(std::mt19937& rng) {
  std::uniform_int_distribution<int> frames_d(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-6.0, 6.0);
  DetectionCorpus c;
  const int frames = frames_d(rng);
  std::uniform_int_distribution<int> gt_total(1, 10);
  std::uniform_int_distribution<int> pred_total(0, 20);
  const int n_gt = gt_total(rng);
  const int n_pred = pred_total(rng);
  c.predictions.resize(static_cast<std::size_t>(frames));
  c.ground_truth.resize(static_cast<std::size_t>(frames));
  std::uniform_int_distribution<int> pick(0, frames - 1);
  for (int i = 0; i < n_gt; ++i) {
    c.ground_truth[static_cast<std::size_t>(pick(rng))].push_back(random_box(rng, 100.0));
  }
  for (int i = 0; i < n_pred; ++i) {
    const auto f = static_cast<std::size_t>(pick(rng));
    BoundingBox b = random_box(rng, 100.0);
    if (!c.ground_truth[f].empty() && unit(rng) < 0.7) {
      std::uniform_int_distribution<std::size_t> g(0, c.ground_truth[f].size() - 1);
      b = c.ground_truth[f][g(rng)];
      b.x1 += jitter(rng);
      b.y1 += jitter(rng);
      b.x2 = std::max(b.x1 + 0.5, b.x2 + jitter(rng));
      b.y2 = std::max(b.y1 + 0.5, b.y2 + jitter(rng));
    }
    c.predictions[f].push_back({b, unit(rng)});
  }
  return c;
}

}  // namespace popsweeper::testing
