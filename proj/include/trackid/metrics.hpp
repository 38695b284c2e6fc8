#pragma once

// HOTA-family evaluation: TI-HOTA over court positions and identity
// attributes, and IoU-based HOTA with ID-switch counting.

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trackid/assignment.hpp"
#include "trackid/error.hpp"
#include "trackid/types.hpp"

namespace trackid {

/// The nineteen thresholds 0.05, 0.10, ..., 0.95.
inline std::vector<double> default_alphas() {
  std::vector<double> a;
  for (int k = 1; k <= 19; ++k) a.push_back(k / 20.0);
  return a;
}

struct SimilarityParams {
  double tau = 1.0;  // meters
  std::vector<double> alphas = default_alphas();

  void validate() const {
    if (!(tau > 0) || !std::isfinite(tau)) throw MetricError("tau must be positive");
    if (alphas.empty()) throw MetricError("alpha set is empty");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      if (!(alphas[i] > 0 && alphas[i] < 1)) throw MetricError("alphas must lie in (0,1)");
      if (i > 0 && !(alphas[i] > alphas[i - 1])) throw MetricError("alphas must be strictly increasing");
    }
  }
};

struct EvalOptions {
  /// Average the association score over distinct (gt, pred) pairs instead of
  /// over every true-positive instance.
  bool assa_per_pair = false;
};

/// exp(ln(0.05) * d^2 / tau^2), evaluated as 0.05^(d^2/tau^2) so that a
/// distance of exactly tau gives 0.05 to the bit.
inline double loc_sim(const CourtPoint& p, const CourtPoint& g, double tau) {
  return std::pow(0.05, squared_distance(p, g) / (tau * tau));
}

/// 1 when team and role both match.
inline int id_sim(const IdentityAttributes& p, const IdentityAttributes& g) {
  if (p.is_indoor() != g.is_indoor()) throw MetricError("attribute modes differ between prediction and ground truth");
  return p == g ? 1 : 0;
}

struct PairAssociation {
  int gt_id = 0;
  int pred_id = 0;
  long tpa = 0;
  long fpa = 0;
  long fna = 0;
};

struct AlphaResult {
  double alpha = 0;
  long tp = 0, fp = 0, fn = 0;
  double deta = 0, assa = 0, hota = 0;  // fractions in [0,1]
  std::vector<PairAssociation> pairs;
};

struct MetricReport {
  std::string task;                      // "track-id" or "mot"
  double hota = 0, deta = 0, assa = 0;   // percent, mean over alphas
  std::vector<AlphaResult> per_alpha;
  std::optional<long> id_switches;       // mot only
  long gt_detections = 0, pred_detections = 0;
  std::vector<std::string> warnings;
};

using SimilarityFn = std::function<double(const Detection& pred, const Detection& gt)>;

namespace detail {

struct FrameSims {
  std::vector<int> gt_ids;
  std::vector<int> pred_ids;
  Eigen::MatrixXd sim;  // gt rows x pred cols
};

inline std::vector<FrameSims> frame_similarities(const SequenceData& pred, const SequenceData& gt,
                                                 const SimilarityFn& sim, MetricReport& report) {
  FrameRange range = gt.frame_range();
  if (!(pred.frame_range() == gt.frame_range())) {
    range = {std::max(pred.frame_range().first, gt.frame_range().first),
             std::min(pred.frame_range().last, gt.frame_range().last)};
    report.warnings.push_back("frame ranges differ; evaluating frames " + std::to_string(range.first) + ".." +
                              std::to_string(range.last));
  }
  std::map<int, std::pair<std::vector<const Detection*>, std::vector<const Detection*>>> frames;
  for (const Detection& d : gt.detections())
    if (range.contains(d.frame_id)) frames[d.frame_id].first.push_back(&d);
  for (const Detection& d : pred.detections())
    if (range.contains(d.frame_id)) frames[d.frame_id].second.push_back(&d);
  std::vector<FrameSims> out;
  out.reserve(frames.size());
  for (const auto& [f, gp] : frames) {
    const auto& [g, p] = gp;
    FrameSims fs;
    fs.sim.resize(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(p.size()));
    for (const Detection* d : g) fs.gt_ids.push_back(d->tracklet_id);
    for (const Detection* d : p) fs.pred_ids.push_back(d->tracklet_id);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j) fs.sim(i, j) = sim(*p[j], *g[i]);
    out.push_back(std::move(fs));
  }
  return out;
}

inline std::vector<std::vector<Match>> match_frames(const std::vector<FrameSims>& frames, double alpha) {
  std::vector<std::vector<Match>> out;
  out.reserve(frames.size());
  for (const FrameSims& fs : frames) {
    const Eigen::MatrixXd gated = (fs.sim.array() >= alpha).select(fs.sim, 0.0);
    out.push_back(solve_assignment(gated).pairs);
  }
  return out;
}

inline AlphaResult score_alpha(const std::vector<FrameSims>& frames, double alpha, const EvalOptions& opt) {
  AlphaResult r;
  r.alpha = alpha;
  std::map<int, long> gt_count, pred_count;
  std::map<std::pair<int, int>, long> tpa;
  const auto matches = match_frames(frames, alpha);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const FrameSims& fs = frames[k];
    for (int g : fs.gt_ids) ++gt_count[g];
    for (int p : fs.pred_ids) ++pred_count[p];
    r.tp += static_cast<long>(matches[k].size());
    r.fn += static_cast<long>(fs.gt_ids.size() - matches[k].size());
    r.fp += static_cast<long>(fs.pred_ids.size() - matches[k].size());
    for (const Match& m : matches[k]) ++tpa[{fs.gt_ids[m.row], fs.pred_ids[m.col]}];
  }
  const long denom = r.tp + r.fp + r.fn;
  r.deta = denom > 0 ? static_cast<double>(r.tp) / denom : 0.0;
  double weighted = 0.0, per_pair = 0.0;
  for (const auto& [key, n] : tpa) {
    PairAssociation pa{key.first, key.second, n, pred_count[key.second] - n, gt_count[key.first] - n};
    const double a = static_cast<double>(pa.tpa) / static_cast<double>(pa.tpa + pa.fpa + pa.fna);
    weighted += static_cast<double>(n) * a;
    per_pair += a;
    r.pairs.push_back(pa);
  }
  if (r.tp > 0) r.assa = opt.assa_per_pair ? per_pair / static_cast<double>(tpa.size()) : weighted / r.tp;
  r.hota = std::sqrt(r.deta * r.assa);
  return r;
}

}  // namespace detail

/// Shared machinery: per-alpha per-frame matching on `sim`, then detection and
/// association accuracy per alpha, averaged over the alpha set.
inline MetricReport evaluate_hota_family(const SequenceData& pred, const SequenceData& gt, const SimilarityFn& sim,
                                         const std::vector<double>& alphas, const EvalOptions& opt = {},
                                         std::string task = "hota") {
  MetricReport report;
  report.task = std::move(task);
  const auto frames = detail::frame_similarities(pred, gt, sim, report);
  for (const auto& fs : frames) {
    report.gt_detections += static_cast<long>(fs.gt_ids.size());
    report.pred_detections += static_cast<long>(fs.pred_ids.size());
  }
  for (double a : alphas) report.per_alpha.push_back(detail::score_alpha(frames, a, opt));
  for (const AlphaResult& r : report.per_alpha) {
    report.hota += r.hota;
    report.deta += r.deta;
    report.assa += r.assa;
  }
  const double n = static_cast<double>(alphas.size());
  report.hota *= 100.0 / n;
  report.deta *= 100.0 / n;
  report.assa *= 100.0 / n;
  return report;
}

inline void require_track_id_fields(const SequenceData& s, const char* which) {
  for (const Detection& d : s.detections())
    if (!d.court || !d.attrs)
      throw MetricError(std::string(which) + " detection at frame " + std::to_string(d.frame_id) + ", id " +
                        std::to_string(d.tracklet_id) + " lacks court coordinates or attributes");
}

/// TI-HOTA with similarity LocSim x IdSim.
inline MetricReport evaluate_track_id(const SequenceData& pred, const SequenceData& gt,
                                      const SimilarityParams& params = {}, const EvalOptions& opt = {}) {
  params.validate();
  require_track_id_fields(pred, "prediction");
  require_track_id_fields(gt, "ground-truth");
  const double tau = params.tau;
  const SimilarityFn sim = [tau](const Detection& p, const Detection& g) {
    if (id_sim(*p.attrs, *g.attrs) == 0) return 0.0;
    return loc_sim(*p.court, *g.court, tau);
  };
  return evaluate_hota_family(pred, gt, sim, params.alphas, opt, "track-id");
}

/// Counts events where a ground-truth ID is matched to a different prediction
/// ID than at its previous match, with matching at the given IoU threshold.
inline long count_id_switches(const SequenceData& pred, const SequenceData& gt, double threshold = 0.5) {
  MetricReport scratch;
  const SimilarityFn sim = [](const Detection& p, const Detection& g) { return iou(p.bbox, g.bbox); };
  const auto frames = detail::frame_similarities(pred, gt, sim, scratch);
  const auto matches = detail::match_frames(frames, threshold);
  std::map<int, int> last;
  long switches = 0;
  for (std::size_t k = 0; k < frames.size(); ++k)
    for (const Match& m : matches[k]) {
      const int g = frames[k].gt_ids[m.row];
      const int p = frames[k].pred_ids[m.col];
      const auto it = last.find(g);
      if (it != last.end() && it->second != p) ++switches;
      last[g] = p;
    }
  return switches;
}

/// Box-based HOTA/DetA/AssA plus ID switches.
inline MetricReport evaluate_mot_iou(const SequenceData& pred, const SequenceData& gt,
                                     const std::vector<double>& alphas = default_alphas(),
                                     const EvalOptions& opt = {}) {
  const SimilarityFn sim = [](const Detection& p, const Detection& g) { return iou(p.bbox, g.bbox); };
  MetricReport r = evaluate_hota_family(pred, gt, sim, alphas, opt, "mot");
  r.id_switches = count_id_switches(pred, gt, 0.5);
  return r;
}

}  // namespace trackid
