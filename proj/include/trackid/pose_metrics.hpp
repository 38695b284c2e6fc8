#pragma once

// Percentage of Detected Joints with torso-length normalization.

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "trackid/error.hpp"
#include "trackid/types.hpp"

namespace trackid {

/// Distance from the shoulder midpoint to the center point.
inline double torso_length(const PoseFrame& pose) {
  const ImagePoint& ls = pose[Keypoint::l_shoulder];
  const ImagePoint& rs = pose[Keypoint::r_shoulder];
  const ImagePoint& c = pose[Keypoint::center];
  if (!ls.visible || !rs.visible || !c.visible)
    throw MetricError("torso length needs both shoulders and the center visible");
  return std::hypot((ls.x + rs.x) / 2 - c.x, (ls.y + rs.y) / 2 - c.y);
}

struct PdjResult {
  std::array<double, kNumKeypoints> rate{};  // fraction detected per keypoint
  std::array<long, kNumKeypoints> detected{};
  std::array<long, kNumKeypoints> visible{};  // ground-truth visible counts
  double mean = 0;                            // over keypoints with visible > 0
  long paired = 0;
  long unpaired = 0;    // poses present on one side only
  long degenerate = 0;  // ground-truth poses with zero or unmeasurable torso
};

/// Normalized error per keypoint of each paired pose; negative when the ground
/// truth keypoint is invisible, +inf when only the prediction is invisible.
struct PoseErrors {
  std::vector<std::array<double, kNumKeypoints>> errors;
  long unpaired = 0;
  long degenerate = 0;
};

inline PoseErrors normalized_pose_errors(std::span<const PoseFrame> pred, std::span<const PoseFrame> gt) {
  std::map<std::pair<int, int>, const PoseFrame*> pred_by_key, gt_by_key;
  for (const PoseFrame& p : pred)
    if (!pred_by_key.emplace(std::pair(p.frame_id, p.player_id), &p).second)
      throw MetricError("duplicate predicted pose for frame " + std::to_string(p.frame_id));
  for (const PoseFrame& g : gt)
    if (!gt_by_key.emplace(std::pair(g.frame_id, g.player_id), &g).second)
      throw MetricError("duplicate ground-truth pose for frame " + std::to_string(g.frame_id));
  PoseErrors out;
  for (const auto& [key, g] : gt_by_key) {
    const auto it = pred_by_key.find(key);
    if (it == pred_by_key.end()) {
      ++out.unpaired;
      continue;
    }
    double torso = 0;
    try {
      torso = torso_length(*g);
    } catch (const MetricError&) {
      ++out.degenerate;
      continue;
    }
    if (!(torso > 0)) {
      ++out.degenerate;
      continue;
    }
    const PoseFrame& p = *it->second;
    std::array<double, kNumKeypoints> e{};
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      if (!g->keypoints[k].visible) e[k] = -1.0;
      else if (!p.keypoints[k].visible) e[k] = std::numeric_limits<double>::infinity();
      else e[k] = std::hypot(p.keypoints[k].x - g->keypoints[k].x, p.keypoints[k].y - g->keypoints[k].y) / torso;
    }
    out.errors.push_back(e);
  }
  for (const auto& [key, p] : pred_by_key)
    if (!gt_by_key.count(key)) ++out.unpaired;
  return out;
}

inline PdjResult pdj_from_errors(const PoseErrors& pe, double threshold) {
  PdjResult r;
  r.unpaired = pe.unpaired;
  r.degenerate = pe.degenerate;
  r.paired = static_cast<long>(pe.errors.size());
  for (const auto& e : pe.errors)
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      if (e[k] < 0) continue;
      ++r.visible[k];
      if (e[k] < threshold) ++r.detected[k];
    }
  int used = 0;
  for (std::size_t k = 0; k < kNumKeypoints; ++k) {
    if (r.visible[k] == 0) continue;
    r.rate[k] = static_cast<double>(r.detected[k]) / static_cast<double>(r.visible[k]);
    r.mean += r.rate[k];
    ++used;
  }
  if (used > 0) r.mean /= used;
  return r;
}

/// A keypoint is detected when its error over the ground-truth torso length is
/// strictly below `threshold`. Invisible ground-truth keypoints are excluded.
inline PdjResult pdj(std::span<const PoseFrame> pred, std::span<const PoseFrame> gt, double threshold = 0.5) {
  const PoseErrors pe = normalized_pose_errors(pred, gt);
  if (pe.errors.empty()) throw MetricError("no pose pairs with a measurable torso");
  return pdj_from_errors(pe, threshold);
}

/// Left Riemann sum of mean PDJ over thresholds 0, 0.01, ..., 0.50; a perfect
/// predictor scores 0.5.
inline double pdj_auc(std::span<const PoseFrame> pred, std::span<const PoseFrame> gt) {
  const PoseErrors pe = normalized_pose_errors(pred, gt);
  if (pe.errors.empty()) throw MetricError("no pose pairs with a measurable torso");
  double sum = 0;
  for (int i = 0; i <= 50; ++i) sum += pdj_from_errors(pe, i / 100.0).mean;
  return sum / 100.0;
}

}  // namespace trackid
