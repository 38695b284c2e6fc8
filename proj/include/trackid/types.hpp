#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "trackid/error.hpp"

namespace trackid {

enum class Mode { indoor, outdoor, drone };
enum class Team { offense, defense };
enum class InitialPosition { top, left, right };

struct JerseyNumber {
  int value = 0;
  friend bool operator==(const JerseyNumber&, const JerseyNumber&) = default;
};

/// Identification payload: team plus either the initial position (indoor) or
/// the jersey number (outdoor).
struct IdentityAttributes {
  Team team = Team::offense;
  std::variant<InitialPosition, JerseyNumber> role;

  bool is_indoor() const { return std::holds_alternative<InitialPosition>(role); }
  friend bool operator==(const IdentityAttributes&, const IdentityAttributes&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Meters on the ground plane: end line along x at y = 0, y increasing into the court.
using CourtPoint = Point2;
/// Image pixels.
using PixelPoint = Point2;

inline double distance(const CourtPoint& a, const CourtPoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double squared_distance(const CourtPoint& a, const CourtPoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}
inline CourtPoint midpoint(const CourtPoint& a, const CourtPoint& b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }

/// Axis-aligned image box, top-left corner plus extent, in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  /// Midpoint of the bottom edge; where the player touches the ground.
  PixelPoint foot_point() const { return {x + w / 2, y + h}; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

inline double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

struct Detection {
  int frame_id = 0;
  int tracklet_id = 0;
  BBox bbox;
  std::optional<CourtPoint> court;
  std::optional<IdentityAttributes> attrs;
  std::optional<double> confidence;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameRange {
  int first = 0;
  int last = -1;

  bool contains(int f) const { return f >= first && f <= last; }
  int length() const { return last >= first ? last - first + 1 : 0; }
  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

/// All detections of one tracklet ID, ascending frame order.
struct Tracklet {
  int id = 0;
  std::vector<Detection> detections;

  int first_frame() const { return detections.front().frame_id; }
  int last_frame() const { return detections.back().frame_id; }
};

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::indoor: return "indoor";
    case Mode::outdoor: return "outdoor";
    case Mode::drone: return "drone";
  }
  return "?";
}
inline std::string_view to_string(Team t) { return t == Team::offense ? "offense" : "defense"; }
inline std::string_view to_string(InitialPosition p) {
  switch (p) {
    case InitialPosition::top: return "top";
    case InitialPosition::left: return "left";
    case InitialPosition::right: return "right";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "indoor") return Mode::indoor;
  if (s == "outdoor") return Mode::outdoor;
  if (s == "drone") return Mode::drone;
  return std::nullopt;
}
inline std::optional<Team> parse_team(std::string_view s) {
  if (s == "offense") return Team::offense;
  if (s == "defense") return Team::defense;
  return std::nullopt;
}
inline std::optional<InitialPosition> parse_initial_position(std::string_view s) {
  if (s == "top") return InitialPosition::top;
  if (s == "left") return InitialPosition::left;
  if (s == "right") return InitialPosition::right;
  return std::nullopt;
}

inline bool attrs_conform(Mode mode, const IdentityAttributes& a) {
  switch (mode) {
    case Mode::indoor: return a.is_indoor();
    case Mode::outdoor: return !a.is_indoor() && std::get<JerseyNumber>(a.role).value >= 0;
    case Mode::drone: return false;
  }
  return false;
}

/// Ground truth or predictions for one clip. Detections are kept sorted by
/// (frame_id, tracklet_id); the object is immutable once constructed.
class SequenceData {
 public:
  SequenceData() = default;

  /// Validates every invariant; throws trackid::Error on violation. Without an
  /// explicit range the detections' min/max frame is used; without
  /// `total_frames` the range length is used.
  SequenceData(Mode mode, std::vector<Detection> detections, std::optional<FrameRange> range = std::nullopt,
               std::optional<int> total_frames = std::nullopt)
      : mode_(mode), detections_(std::move(detections)) {
    std::stable_sort(detections_.begin(), detections_.end(), [](const Detection& a, const Detection& b) {
      return std::pair(a.frame_id, a.tracklet_id) < std::pair(b.frame_id, b.tracklet_id);
    });
    if (range) {
      range_ = *range;
    } else if (!detections_.empty()) {
      range_ = {detections_.front().frame_id, detections_.back().frame_id};
    }
    std::set<int> frames;
    for (std::size_t i = 0; i < detections_.size(); ++i) {
      const Detection& d = detections_[i];
      if (d.frame_id < 0) throw Error("negative frame_id " + std::to_string(d.frame_id));
      if (!(d.bbox.w > 0) || !(d.bbox.h > 0))
        throw Error("non-positive box size at frame " + std::to_string(d.frame_id) + ", id " +
                    std::to_string(d.tracklet_id));
      if (!range_.contains(d.frame_id))
        throw Error("frame " + std::to_string(d.frame_id) + " outside frame range");
      if (i > 0 && detections_[i - 1].frame_id == d.frame_id && detections_[i - 1].tracklet_id == d.tracklet_id)
        throw Error("duplicate detection for frame " + std::to_string(d.frame_id) + ", id " +
                    std::to_string(d.tracklet_id));
      if (d.attrs && !attrs_conform(mode_, *d.attrs))
        throw Error("attributes do not conform to " + std::string(to_string(mode_)) + " mode at frame " +
                    std::to_string(d.frame_id));
      if (d.confidence && !(*d.confidence >= 0 && *d.confidence <= 1))
        throw Error("confidence outside [0,1] at frame " + std::to_string(d.frame_id));
      frames.insert(d.frame_id);
    }
    total_frames_ = total_frames.value_or(range_.length());
    if (total_frames_ < static_cast<int>(frames.size()))
      throw Error("total frame count " + std::to_string(total_frames_) + " below number of distinct frames " +
                  std::to_string(frames.size()));
  }

  Mode mode() const { return mode_; }
  FrameRange frame_range() const { return range_; }
  int total_frames() const { return total_frames_; }
  std::span<const Detection> detections() const { return detections_; }
  bool empty() const { return detections_.empty(); }

  /// Same header (mode, range, frame count) with a new detection set.
  SequenceData with_detections(std::vector<Detection> detections) const {
    return SequenceData(mode_, std::move(detections), range_, total_frames_);
  }

  std::vector<Tracklet> tracklets() const {
    std::map<int, Tracklet> by_id;
    for (const Detection& d : detections_) {
      Tracklet& t = by_id[d.tracklet_id];
      t.id = d.tracklet_id;
      t.detections.push_back(d);
    }
    std::vector<Tracklet> out;
    out.reserve(by_id.size());
    for (auto& [id, t] : by_id) out.push_back(std::move(t));
    return out;
  }

  std::vector<int> tracklet_ids() const {
    std::set<int> ids;
    for (const Detection& d : detections_) ids.insert(d.tracklet_id);
    return {ids.begin(), ids.end()};
  }

  /// Detections grouped by frame, ascending.
  std::map<int, std::vector<Detection>> by_frame() const {
    std::map<int, std::vector<Detection>> out;
    for (const Detection& d : detections_) out[d.frame_id].push_back(d);
    return out;
  }

  friend bool operator==(const SequenceData&, const SequenceData&) = default;

 private:
  Mode mode_ = Mode::indoor;
  FrameRange range_{};
  int total_frames_ = 0;
  std::vector<Detection> detections_;
};

inline std::vector<Detection> flatten(std::span<const Tracklet> tracklets) {
  std::vector<Detection> out;
  for (const Tracklet& t : tracklets) out.insert(out.end(), t.detections.begin(), t.detections.end());
  return out;
}

// Pose keypoints.

inline constexpr std::size_t kNumKeypoints = 10;

enum class Keypoint : std::size_t {
  head,
  l_shoulder,
  r_shoulder,
  l_elbow,
  r_elbow,
  l_wrist,
  r_wrist,
  center,
  l_ankle,
  r_ankle,
};

inline constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "head", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist", "center", "l_ankle", "r_ankle"};

struct ImagePoint {
  double x = 0.0;
  double y = 0.0;
  bool visible = true;
  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

struct PoseFrame {
  int frame_id = 0;
  int player_id = 0;
  std::array<ImagePoint, kNumKeypoints> keypoints{};

  const ImagePoint& operator[](Keypoint k) const { return keypoints[static_cast<std::size_t>(k)]; }
  ImagePoint& operator[](Keypoint k) { return keypoints[static_cast<std::size_t>(k)]; }
  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

/// One tracklet-level jersey number; `number` empty when recognition failed.
struct JerseyPrediction {
  int tracklet_id = 0;
  std::optional<int> number;
  friend bool operator==(const JerseyPrediction&, const JerseyPrediction&) = default;
};

}  // namespace trackid
