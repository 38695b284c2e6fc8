#pragma once

// Tracklet-processing stages of the Track-ID baseline: court projection,
// non-player exclusion, ID-switch merging and post-processing.

#include <algorithm>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <vector>

#include "trackid/court_geometry.hpp"
#include "trackid/error.hpp"
#include "trackid/types.hpp"

namespace trackid {

struct PipelineConfig {
  int t_overlap = 10;
  double detection_buffer_m = 3.0;
  int min_continuous_frames = 10;
  double endline_outer_m = 3.0;
  double endline_inner_m = 1.0;
  double coffin_endline_dist_m = 10.0;
  double occupancy_fraction = 0.5;
  int max_players = 6;

  /// T_overlap of 10 for indoor clips and 50 for outdoor ones.
  static PipelineConfig for_mode(Mode m) {
    PipelineConfig c;
    c.t_overlap = m == Mode::outdoor ? 50 : 10;
    return c;
  }

  ZoneParams zones() const { return {detection_buffer_m, endline_outer_m, endline_inner_m, coffin_endline_dist_m}; }

  void validate() const {
    if (t_overlap < 0) throw Error("t_overlap must be >= 0");
    if (detection_buffer_m < 0 || endline_outer_m < 0 || endline_inner_m < 0 || coffin_endline_dist_m < 0)
      throw Error("distances must be >= 0");
    if (min_continuous_frames < 0) throw Error("min_continuous_frames must be >= 0");
    if (occupancy_fraction < 0 || occupancy_fraction > 1) throw Error("occupancy_fraction must be in [0,1]");
    if (max_players < 1) throw Error("max_players must be >= 1");
  }
};

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  return {{"t_overlap", c.t_overlap},
          {"detection_buffer_m", c.detection_buffer_m},
          {"min_continuous_frames", c.min_continuous_frames},
          {"endline_outer_m", c.endline_outer_m},
          {"endline_inner_m", c.endline_inner_m},
          {"coffin_endline_dist_m", c.coffin_endline_dist_m},
          {"occupancy_fraction", c.occupancy_fraction},
          {"max_players", c.max_players}};
}

/// Missing keys keep the values of `base`; unknown keys are rejected.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  static const std::set<std::string> kKeys = {"t_overlap",       "detection_buffer_m",    "min_continuous_frames",
                                              "endline_outer_m", "endline_inner_m",       "coffin_endline_dist_m",
                                              "occupancy_fraction", "max_players", "court"};
  for (const auto& [k, v] : j.items())
    if (!kKeys.count(k)) throw Error("unknown pipeline config key '" + k + "'");
  PipelineConfig c = base;
  c.t_overlap = j.value("t_overlap", c.t_overlap);
  c.detection_buffer_m = j.value("detection_buffer_m", c.detection_buffer_m);
  c.min_continuous_frames = j.value("min_continuous_frames", c.min_continuous_frames);
  c.endline_outer_m = j.value("endline_outer_m", c.endline_outer_m);
  c.endline_inner_m = j.value("endline_inner_m", c.endline_inner_m);
  c.coffin_endline_dist_m = j.value("coffin_endline_dist_m", c.coffin_endline_dist_m);
  c.occupancy_fraction = j.value("occupancy_fraction", c.occupancy_fraction);
  c.max_players = j.value("max_players", c.max_players);
  c.validate();
  return c;
}

/// A detection counts as on court when it has court coordinates and lies
/// within the detection buffer around the court rectangle.
inline bool counts_on_court(const Detection& d, const CourtModel& court, const PipelineConfig& cfg) {
  return d.court && !zone_test(court, *d.court, Zone::outside_3m, cfg.zones());
}

/// Fills court coordinates of every detection from its box's bottom midpoint.
inline SequenceData project_to_court(const SequenceData& seq, const Homography& h) {
  std::vector<Detection> out(seq.detections().begin(), seq.detections().end());
  for (Detection& d : out) d.court = project_detection(h, d);
  return seq.with_detections(std::move(out));
}

/// Drops detections farther than the buffer from the court rectangle.
inline SequenceData exclude_detections(const SequenceData& seq, const CourtModel& court, const PipelineConfig& cfg) {
  std::vector<Detection> out;
  for (const Detection& d : seq.detections()) {
    if (!d.court)
      throw StageError("exclude_detections", "detection at frame " + std::to_string(d.frame_id) + ", id " +
                                                 std::to_string(d.tracklet_id) + " has no court coordinates");
    if (!zone_test(court, *d.court, Zone::outside_3m, cfg.zones())) out.push_back(d);
  }
  return seq.with_detections(std::move(out));
}

struct TrackletZoneStats {
  int frames = 0;
  int longest_on_court_run = 0;
  int endline_band_frames = 0;
  int coffin_corner_frames = 0;
};

inline TrackletZoneStats zone_stats(const Tracklet& t, const CourtModel& court, const PipelineConfig& cfg) {
  TrackletZoneStats s;
  int run = 0;
  int prev_frame = std::numeric_limits<int>::min();
  const ZoneParams zp = cfg.zones();
  for (const Detection& d : t.detections) {
    if (!d.court)
      throw StageError("exclude_tracklets", "tracklet " + std::to_string(t.id) + " lacks court coordinates");
    ++s.frames;
    if (counts_on_court(d, court, cfg)) {
      run = (prev_frame != std::numeric_limits<int>::min() && d.frame_id == prev_frame + 1 && run > 0) ? run + 1 : 1;
    } else {
      run = 0;
    }
    prev_frame = d.frame_id;
    s.longest_on_court_run = std::max(s.longest_on_court_run, run);
    if (zone_test(court, *d.court, Zone::endline_band, zp)) ++s.endline_band_frames;
    if (zone_test(court, *d.court, Zone::coffin_corner, zp)) ++s.coffin_corner_frames;
  }
  return s;
}

/// Removes tracklets that (a) never stay on court for min_continuous_frames
/// consecutive frames, (b) spend more than occupancy_fraction of their frames
/// in the end-line band, or (c) more than that in the coffin corner.
inline SequenceData exclude_tracklets(const SequenceData& seq, const CourtModel& court, const PipelineConfig& cfg) {
  std::set<int> keep;
  for (const Tracklet& t : seq.tracklets()) {
    const TrackletZoneStats s = zone_stats(t, court, cfg);
    const bool short_lived = s.longest_on_court_run < cfg.min_continuous_frames;
    const bool endline = s.endline_band_frames > cfg.occupancy_fraction * s.frames;
    const bool coffin = s.coffin_corner_frames > cfg.occupancy_fraction * s.frames;
    if (!short_lived && !endline && !coffin) keep.insert(t.id);
  }
  std::vector<Detection> out;
  for (const Detection& d : seq.detections())
    if (keep.count(d.tracklet_id)) out.push_back(d);
  return seq.with_detections(std::move(out));
}

struct MergeCandidate {
  int orig_id = 0;
  int overlap = 0;
  int missing = 0;
  int cost = 0;
};

struct MergeEvent {
  int new_id = 0;
  std::vector<MergeCandidate> candidates;  // origIDs that passed the overlap test
  std::vector<int> skipped;                // origIDs with overlap >= T_overlap
  std::optional<int> merged_into;
  int dropped_duplicates = 0;
};

struct MergeOutcome {
  SequenceData sequence;
  std::vector<MergeEvent> events;
};

/// ID-switch detection and merging. IDs present at the first frame are origin
/// IDs; every later ID is relabeled to the origin ID of minimum
/// cost = overlap + (F_max - |union of on-court frames|), skipping origin IDs
/// whose on-court overlap reaches T_overlap. New IDs are visited in order of
/// first appearance; cost ties go to the lowest origin ID. Duplicate
/// (frame, id) rows created by a relabel keep the row that came first in the
/// input's (frame_id, tracklet_id) order.
inline MergeOutcome merge_id_switches_traced(const SequenceData& seq, const CourtModel& court,
                                             const PipelineConfig& cfg) {
  if (seq.empty()) throw StageError("merge_id_switches", "empty sequence");
  const std::span<const Detection> dets = seq.detections();
  std::vector<int> label(dets.size());
  std::vector<char> alive(dets.size(), 1);
  for (std::size_t i = 0; i < dets.size(); ++i) label[i] = dets[i].tracklet_id;

  const int t0 = dets.front().frame_id;
  std::set<int> orig_ids;
  std::map<int, int> first_seen;
  for (const Detection& d : dets) {
    if (d.frame_id == t0) orig_ids.insert(d.tracklet_id);
    first_seen.try_emplace(d.tracklet_id, d.frame_id);
  }
  std::vector<std::pair<int, int>> new_ids;  // (first frame, id)
  for (const auto& [id, f] : first_seen)
    if (!orig_ids.count(id)) new_ids.emplace_back(f, id);
  std::sort(new_ids.begin(), new_ids.end());

  auto on_court_frames = [&](int id) {
    std::set<int> frames;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (alive[i] && label[i] == id && counts_on_court(dets[i], court, cfg)) frames.insert(dets[i].frame_id);
    return frames;
  };

  MergeOutcome outcome;
  const int f_max = seq.total_frames();
  for (const auto& [first, new_id] : new_ids) {
    MergeEvent ev;
    ev.new_id = new_id;
    const std::set<int> frames_new = on_court_frames(new_id);
    for (int orig_id : orig_ids) {
      const std::set<int> frames_orig = on_court_frames(orig_id);
      int overlap = 0;
      for (int f : frames_new) overlap += static_cast<int>(frames_orig.count(f));
      if (overlap >= cfg.t_overlap) {
        ev.skipped.push_back(orig_id);
        continue;
      }
      const int union_size = static_cast<int>(frames_orig.size() + frames_new.size()) - overlap;
      const int missing = f_max - union_size;
      ev.candidates.push_back({orig_id, overlap, missing, overlap + missing});
    }
    if (!ev.candidates.empty()) {
      const MergeCandidate* best = &ev.candidates.front();
      for (const MergeCandidate& c : ev.candidates)
        if (c.cost < best->cost) best = &c;
      const int best_id = best->orig_id;
      ev.merged_into = best_id;
      for (std::size_t i = 0; i < dets.size(); ++i)
        if (alive[i] && label[i] == new_id) label[i] = best_id;
      std::set<int> seen_frames;
      for (std::size_t i = 0; i < dets.size(); ++i) {
        if (!alive[i] || label[i] != best_id) continue;
        if (!seen_frames.insert(dets[i].frame_id).second) {
          alive[i] = 0;
          ++ev.dropped_duplicates;
        }
      }
    }
    outcome.events.push_back(std::move(ev));
  }

  std::vector<Detection> out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!alive[i]) continue;
    Detection d = dets[i];
    d.tracklet_id = label[i];
    out.push_back(d);
  }
  outcome.sequence = seq.with_detections(std::move(out));
  return outcome;
}

inline SequenceData merge_id_switches(const SequenceData& seq, const CourtModel& court, const PipelineConfig& cfg) {
  return merge_id_switches_traced(seq, court, cfg).sequence;
}

namespace detail {

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace detail

/// Fills every frame strictly between two observations by linear
/// interpolation of box and court position.
inline Tracklet interpolate_gaps(const Tracklet& t) {
  Tracklet out{t.id, {}};
  for (std::size_t i = 0; i < t.detections.size(); ++i) {
    const Detection& a = t.detections[i];
    out.detections.push_back(a);
    if (i + 1 == t.detections.size()) break;
    const Detection& b = t.detections[i + 1];
    const int span = b.frame_id - a.frame_id;
    for (int f = a.frame_id + 1; f < b.frame_id; ++f) {
      const double s = static_cast<double>(f - a.frame_id) / span;
      Detection d;
      d.frame_id = f;
      d.tracklet_id = t.id;
      d.bbox = {detail::lerp(a.bbox.x, b.bbox.x, s), detail::lerp(a.bbox.y, b.bbox.y, s),
                detail::lerp(a.bbox.w, b.bbox.w, s), detail::lerp(a.bbox.h, b.bbox.h, s)};
      if (a.court && b.court)
        d.court = CourtPoint{detail::lerp(a.court->x, b.court->x, s), detail::lerp(a.court->y, b.court->y, s)};
      d.attrs = a.attrs;
      out.detections.push_back(d);
    }
  }
  return out;
}

/// Constant-velocity extension to the ends of `range`, using the first two
/// (resp. last two) observations. Box size is held fixed; court points are
/// clamped to the court expanded by the detection buffer. Tracklets with
/// fewer than two observations are returned unchanged.
inline Tracklet extrapolate_endpoints(const Tracklet& t, FrameRange range, const CourtModel& court,
                                      const PipelineConfig& cfg) {
  if (t.detections.size() < 2) return t;
  const Rect limit = court.bounds().expanded(cfg.detection_buffer_m);
  auto extend = [&](const Detection& from, const Detection& toward, int frame) {
    // Step per frame from `toward` to `from`, continued past `from`.
    const double k = static_cast<double>(frame - from.frame_id) / (from.frame_id - toward.frame_id);
    Detection d;
    d.frame_id = frame;
    d.tracklet_id = t.id;
    d.bbox = {from.bbox.x + (from.bbox.x - toward.bbox.x) * k, from.bbox.y + (from.bbox.y - toward.bbox.y) * k,
              from.bbox.w, from.bbox.h};
    if (from.court && toward.court)
      d.court = limit.clamp({from.court->x + (from.court->x - toward.court->x) * k,
                             from.court->y + (from.court->y - toward.court->y) * k});
    d.attrs = from.attrs;
    return d;
  };
  Tracklet out{t.id, {}};
  const Detection& first = t.detections[0];
  const Detection& second = t.detections[1];
  for (int f = range.first; f < first.frame_id; ++f) out.detections.push_back(extend(first, second, f));
  out.detections.insert(out.detections.end(), t.detections.begin(), t.detections.end());
  const Detection& last = t.detections.back();
  const Detection& before = t.detections[t.detections.size() - 2];
  for (int f = last.frame_id + 1; f <= range.last; ++f) out.detections.push_back(extend(last, before, f));
  return out;
}

inline SequenceData interpolate_sequence(const SequenceData& seq) {
  std::vector<Tracklet> ts = seq.tracklets();
  for (Tracklet& t : ts) t = interpolate_gaps(t);
  return seq.with_detections(flatten(ts));
}

inline SequenceData extrapolate_sequence(const SequenceData& seq, const CourtModel& court, const PipelineConfig& cfg) {
  std::vector<Tracklet> ts = seq.tracklets();
  for (Tracklet& t : ts) t = extrapolate_endpoints(t, seq.frame_range(), court, cfg);
  return seq.with_detections(flatten(ts));
}

/// Keeps at most max_players detections per frame, dropping those whose
/// tracklet has the fewest on-court frames first (larger ID first on ties).
inline SequenceData cap_detections_per_frame(const SequenceData& seq, const CourtModel& court,
                                             const PipelineConfig& cfg) {
  std::map<int, int> on_court_count;
  for (const Detection& d : seq.detections())
    on_court_count[d.tracklet_id] += counts_on_court(d, court, cfg) ? 1 : 0;
  std::vector<Detection> out;
  for (auto& [frame, dets] : seq.by_frame()) {
    if (static_cast<int>(dets.size()) > cfg.max_players) {
      std::sort(dets.begin(), dets.end(), [&](const Detection& a, const Detection& b) {
        const int ca = on_court_count[a.tracklet_id];
        const int cb = on_court_count[b.tracklet_id];
        if (ca != cb) return ca > cb;
        return a.tracklet_id < b.tracklet_id;
      });
      dets.resize(cfg.max_players);
    }
    out.insert(out.end(), dets.begin(), dets.end());
  }
  return seq.with_detections(std::move(out));
}

}  // namespace trackid
