#pragma once

// Reference TI-HOTA by exhaustive search. Every partial matching of every
// frame is enumerated, so the result does not depend on the assignment
// solver. Practical only for small frames (at most 8 detections per side).

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "trackid/assignment.hpp"
#include "trackid/error.hpp"
#include "trackid/metrics.hpp"
#include "trackid/types.hpp"

namespace trackid {

namespace oracle_detail {

struct Frame {
  std::vector<int> gt_ids, pred_ids;
  std::vector<std::vector<double>> sim;  // [gt][pred]
};

struct Search {
  const std::vector<std::vector<double>>& w;  // gated, 0 = not allowed
  std::size_t n_pred;
  std::vector<int> cur;
  std::vector<char> used;
  std::size_t best_count = 0;
  double best_score = 0;

  void best(std::size_t row, std::size_t count, double score) {
    if (row == w.size()) {
      if (count > best_count || (count == best_count && score > best_score)) {
        best_count = count;
        best_score = score;
      }
      return;
    }
    for (std::size_t c = 0; c < n_pred; ++c)
      if (!used[c] && w[row][c] > 0) {
        used[c] = 1;
        best(row + 1, count + 1, score + w[row][c]);
        used[c] = 0;
      }
    best(row + 1, count, score);
  }

  // First matching in lexicographic order (columns ascending, unmatched last)
  // that reaches the optimal count and a score within tolerance.
  bool first(std::size_t row, std::size_t count, double score, double threshold) {
    if (row == w.size()) return count == best_count && score >= threshold;
    for (std::size_t c = 0; c < n_pred; ++c)
      if (!used[c] && w[row][c] > 0) {
        used[c] = 1;
        cur[row] = static_cast<int>(c);
        if (first(row + 1, count + 1, score + w[row][c], threshold)) return true;
        used[c] = 0;
      }
    cur[row] = -1;
    return first(row + 1, count, score, threshold);
  }
};

inline std::vector<int> exhaustive_match(const std::vector<std::vector<double>>& w, std::size_t n_pred) {
  Search s{w, n_pred, std::vector<int>(w.size(), -1), std::vector<char>(n_pred, 0)};
  s.best(0, 0, 0.0);
  std::fill(s.used.begin(), s.used.end(), 0);
  const double threshold = s.best_score - kScoreTieTolerance * std::max(1.0, std::abs(s.best_score));
  s.first(0, 0, 0.0, threshold);
  return s.cur;
}

}  // namespace oracle_detail

/// Only the report types and tie tolerance are shared with the main evaluator.
inline MetricReport oracle_ti_hota(const SequenceData& pred, const SequenceData& gt,
                                   const SimilarityParams& params = {}) {
  params.validate();
  const double tau = params.tau;
  const int lo = std::max(pred.frame_range().first, gt.frame_range().first);
  const int hi = std::min(pred.frame_range().last, gt.frame_range().last);
  std::map<int, oracle_detail::Frame> frames;
  std::map<int, std::vector<const Detection*>> gt_at, pred_at;
  for (const Detection& d : gt.detections())
    if (d.frame_id >= lo && d.frame_id <= hi) gt_at[d.frame_id].push_back(&d);
  for (const Detection& d : pred.detections())
    if (d.frame_id >= lo && d.frame_id <= hi) pred_at[d.frame_id].push_back(&d);

  std::map<int, long> gt_total, pred_total;
  for (const auto& [f, v] : gt_at)
    for (const Detection* d : v) ++gt_total[d->tracklet_id];
  for (const auto& [f, v] : pred_at)
    for (const Detection* d : v) ++pred_total[d->tracklet_id];

  for (int f = lo; f <= hi; ++f) {
    const auto& g = gt_at[f];
    const auto& p = pred_at[f];
    if (g.size() > 8 || p.size() > 8) throw MetricError("oracle: more than 8 detections in a frame");
    oracle_detail::Frame fr;
    for (const Detection* d : g) fr.gt_ids.push_back(d->tracklet_id);
    for (const Detection* d : p) fr.pred_ids.push_back(d->tracklet_id);
    fr.sim.assign(g.size(), std::vector<double>(p.size(), 0.0));
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j) {
        const Detection& a = *p[j];
        const Detection& b = *g[i];
        if (!a.court || !b.court || !a.attrs || !b.attrs) throw MetricError("oracle: missing court or attributes");
        if (!(a.attrs->team == b.attrs->team && a.attrs->role == b.attrs->role)) continue;
        const double dx = a.court->x - b.court->x, dy = a.court->y - b.court->y;
        fr.sim[i][j] = std::pow(0.05, (dx * dx + dy * dy) / (tau * tau));
      }
    frames[f] = std::move(fr);
  }

  MetricReport out;
  out.task = "track-id-oracle";
  for (const auto& [id, n] : gt_total) out.gt_detections += n;
  for (const auto& [id, n] : pred_total) out.pred_detections += n;
  for (const double alpha : params.alphas) {
    long tp = 0, fp = 0, fn = 0;
    std::map<std::pair<int, int>, long> tpa;
    for (const auto& [f, fr] : frames) {
      std::vector<std::vector<double>> w = fr.sim;
      for (auto& row : w)
        for (double& v : row)
          if (v < alpha) v = 0.0;
      const std::vector<int> m = oracle_detail::exhaustive_match(w, fr.pred_ids.size());
      long matched = 0;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] >= 0) {
          ++matched;
          ++tpa[{fr.gt_ids[i], fr.pred_ids[m[i]]}];
        }
      tp += matched;
      fn += static_cast<long>(fr.gt_ids.size()) - matched;
      fp += static_cast<long>(fr.pred_ids.size()) - matched;
    }
    const double deta = tp + fp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp + fn) : 0.0;
    double assa = 0.0;
    for (const auto& [key, n] : tpa) {
      const double fpa = static_cast<double>(pred_total[key.second] - n);
      const double fna = static_cast<double>(gt_total[key.first] - n);
      assa += static_cast<double>(n) * (static_cast<double>(n) / (static_cast<double>(n) + fpa + fna));
    }
    if (tp > 0) assa /= static_cast<double>(tp);
    AlphaResult r;
    r.alpha = alpha;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.deta = deta;
    r.assa = assa;
    r.hota = std::sqrt(deta * assa);
    out.per_alpha.push_back(r);
    out.deta += deta;
    out.assa += assa;
    out.hota += r.hota;
  }
  const double n_alpha = static_cast<double>(params.alphas.size());
  out.deta *= 100.0 / n_alpha;
  out.assa *= 100.0 / n_alpha;
  out.hota *= 100.0 / n_alpha;
  return out;
}

}  // namespace trackid
