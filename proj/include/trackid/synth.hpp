#pragma once

// Synthetic scenarios: six players random-walking on a court, seen through a
// fixed camera, with tracker-style corruptions injected into a copy of the
// ground truth.

#include <algorithm>
#include <cstdint>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <variant>
#include <vector>

#include "trackid/court_geometry.hpp"
#include "trackid/error.hpp"
#include "trackid/identity.hpp"
#include "trackid/types.hpp"

namespace trackid {

/// From `frame` on, the track continues under a fresh ID.
struct Fragmentation {
  int track = 0;
  int frame = 0;
};
/// From `frame` on, the two tracks carry each other's IDs.
struct IdExchange {
  int track_a = 0;
  int track_b = 0;
  int frame = 0;
};
/// Gaussian noise on predicted court positions (boxes follow).
struct LocNoise {
  double sigma = 0.0;
};
/// Each predicted detection is removed with probability `rate`.
struct Dropout {
  double rate = 0.0;
};
/// An extra non-player track confined to `zone` for `length` frames.
struct ClutterTrack {
  Zone zone = Zone::coffin_corner;
  int length = 0;
};
/// From `frame` on, the track's predicted team is flipped.
struct AttrFlip {
  int track = 0;
  int frame = 0;
};

using Corruption = std::variant<Fragmentation, IdExchange, LocNoise, Dropout, ClutterTrack, AttrFlip>;

struct MotionParams {
  double step_sigma = 0.05;  // m per frame, each axis
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  int n_players = 6;
  int n_frames = 100;
  Mode mode = Mode::indoor;
  CourtModel court = CourtModel::indoor();
  MotionParams motion;
  StartType start = StartType::top_checkball;  // outdoor only
  std::vector<Corruption> corruptions;
  int crops_per_track = 20;                    // outdoor only

  void validate() const {
    if (n_frames <= 0) throw SynthError("n_frames must be positive");
    if (mode != Mode::drone && n_players != 6) throw SynthError("indoor and outdoor scenarios have 6 players");
    if (n_players < 1) throw SynthError("n_players must be positive");
    if (motion.step_sigma < 0) throw SynthError("step sigma must be >= 0");
    court.validate();
  }
};

struct Scenario {
  SequenceData gt;
  SequenceData pred;
  nlohmann::json manifest;
  Homography court_to_image;
  Homography image_to_court;
  std::vector<Correspondence> correspondences;         // court keypoints and their pixels
  std::vector<JerseyPrediction> jerseys;               // outdoor only, keyed by predicted ID
  std::map<int, std::vector<TorsoCrop>> crops;         // outdoor only, keyed by predicted ID
};

inline constexpr double kSynthBoxWidth = 40.0;
inline constexpr double kSynthBoxHeight = 100.0;

/// Fixed camera looking at the court from behind the far line: the end line
/// is at the bottom of a 1280x720 frame.
inline Homography synthetic_camera(const CourtModel& court) {
  const std::vector<Correspondence> corners = {{{140, 690}, {0, 0}},
                                               {{1140, 690}, {court.width, 0}},
                                               {{920, 250}, {court.width, court.depth}},
                                               {{360, 250}, {0, court.depth}}};
  std::vector<Correspondence> inv;
  for (const auto& c : corners) inv.push_back({c.court, c.image});
  return fit_homography(inv).homography;  // court -> image
}

/// Keypoints a manual annotator would click: court corners, paint corners,
/// the free-throw line ends and the mid-points of both court lines.
inline std::vector<CourtPoint> court_keypoints(const CourtModel& c) {
  return {{0, 0},
          {c.width, 0},
          {c.width, c.depth},
          {0, c.depth},
          {c.paint.x0, 0},
          {c.paint.x1, 0},
          {c.paint.x0, c.paint.y1},
          {c.paint.x1, c.paint.y1},
          {c.width / 2, 0},
          {c.width / 2, c.depth},
          {0, c.depth / 2},
          {c.width, c.depth / 2}};
}

inline BBox box_at(const Homography& court_to_image, const CourtPoint& p) {
  const PixelPoint foot = court_to_image.project(p);
  return {foot.x - kSynthBoxWidth / 2, foot.y - kSynthBoxHeight, kSynthBoxWidth, kSynthBoxHeight};
}

namespace detail {

struct SynthRow {
  int frame = 0;
  int origin = 0;  // gt player ID, or clutter ID
  int id = 0;      // predicted ID
  CourtPoint pos;
  std::optional<IdentityAttributes> attrs;
};

inline double reflect(double v, double lo, double hi) {
  for (int i = 0; i < 8 && (v < lo || v > hi); ++i) v = v < lo ? 2 * lo - v : 2 * hi - v;
  return std::clamp(v, lo, hi);
}

struct Opening {
  std::vector<CourtPoint> pos;
  std::vector<IdentityAttributes> attrs;
};

// Three attacker/defender pairs: one at the top of the key, one on each wing.
// Each defender stands 1 m from its attacker toward the basket.
inline Opening opening_layout(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const CourtModel& c = spec.court;
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  const CourtPoint basket = c.end_line_midpoint();
  const double cx = c.width / 2;
  std::array<CourtPoint, 3> attackers;
  if (spec.mode == Mode::outdoor && spec.start == StartType::top_checkball) {
    attackers[0] = {cx + jitter(rng), c.depth - 0.6 + jitter(rng) / 2};
  } else if (spec.mode == Mode::outdoor) {
    attackers[0] = {cx + jitter(rng) / 2, c.paint.y1 + jitter(rng) / 2};
  } else {
    attackers[0] = {cx + jitter(rng), std::min(c.depth - 1.5, 7.0) + jitter(rng)};
  }
  attackers[1] = {cx - 4.5 + jitter(rng), 4.5 + jitter(rng)};
  attackers[2] = {cx + 4.5 + jitter(rng), 4.5 + jitter(rng)};
  const std::array<InitialPosition, 3> slots = {InitialPosition::top, InitialPosition::left, InitialPosition::right};
  Opening o;
  std::set<int> used_numbers;
  std::uniform_int_distribution<int> number(0, 99);
  auto jersey = [&]() {
    int n;
    do n = number(rng);
    while (!used_numbers.insert(n).second);
    return n;
  };
  for (std::size_t k = 0; k < 3; ++k) {
    const CourtPoint a = attackers[k];
    const double d = distance(a, basket);
    const CourtPoint def{a.x + (basket.x - a.x) / d, a.y + (basket.y - a.y) / d};
    o.pos.push_back(a);
    o.pos.push_back(def);
    if (spec.mode == Mode::outdoor) {
      o.attrs.push_back({Team::offense, JerseyNumber{jersey()}});
      o.attrs.push_back({Team::defense, JerseyNumber{jersey()}});
    } else {
      o.attrs.push_back({Team::offense, slots[k]});
      o.attrs.push_back({Team::defense, slots[k]});
    }
  }
  return o;
}

inline bool in_clutter_zone(const CourtModel& c, const CourtPoint& p, Zone zone) {
  const ZoneParams zp;
  const double dist = c.bounds().distance(p);
  switch (zone) {
    case Zone::outside_3m: return dist > zp.detection_buffer_m + 0.5 && dist < zp.detection_buffer_m + 4.0;
    case Zone::on_court: return c.bounds().contains(p);
    default: return dist < zp.detection_buffer_m - 0.3 && zone_test(c, p, zone, zp);
  }
}

inline std::string_view zone_name(Zone z) {
  switch (z) {
    case Zone::on_court: return "on_court";
    case Zone::outside_3m: return "outside_3m";
    case Zone::endline_band: return "endline_band";
    case Zone::coffin_corner: return "coffin_corner";
  }
  return "?";
}

inline IdentityAttributes random_attrs(Mode mode, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 1), slot(0, 2), number(0, 99);
  const Team t = coin(rng) ? Team::defense : Team::offense;
  if (mode == Mode::outdoor) return {t, JerseyNumber{number(rng)}};
  return {t, static_cast<InitialPosition>(slot(rng))};
}

inline RgbImage bib_crop(const std::array<int, 3>& color, std::mt19937_64& rng) {
  RgbImage img{8, 12, std::vector<std::uint8_t>(8 * 12 * 3)};
  std::uniform_int_distribution<int> noise(-20, 20);
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    for (int ch = 0; ch < 3; ++ch)
      img.pixels[3 * i + ch] = static_cast<std::uint8_t>(std::clamp(color[ch] + noise(rng), 0, 255));
  return img;
}

}  // namespace detail

/// Deterministic for a given spec (including its seed).
inline Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> step(0.0, 1.0);
  const CourtModel& court = spec.court;
  const int n_frames = spec.n_frames;

  Scenario sc;
  sc.court_to_image = synthetic_camera(court);
  sc.image_to_court = sc.court_to_image.inverse();
  for (const CourtPoint& k : court_keypoints(court)) sc.correspondences.push_back({sc.court_to_image.project(k), k});

  // Player IDs 1..n in shuffled order relative to the layout slots.
  std::vector<int> ids(spec.n_players);
  std::iota(ids.begin(), ids.end(), 1);
  std::shuffle(ids.begin(), ids.end(), rng);

  std::vector<CourtPoint> start;
  std::vector<std::optional<IdentityAttributes>> attrs(spec.n_players);
  if (spec.mode == Mode::drone) {
    std::uniform_real_distribution<double> ux(0.5, court.width - 0.5), uy(0.5, court.depth - 0.5);
    for (int i = 0; i < spec.n_players; ++i) start.push_back({ux(rng), uy(rng)});
  } else {
    const detail::Opening o = detail::opening_layout(spec, rng);
    start = o.pos;
    for (int i = 0; i < 6; ++i) attrs[i] = o.attrs[i];
  }

  const double sigma = spec.motion.step_sigma;
  std::vector<detail::SynthRow> gt_rows;
  std::vector<CourtPoint> cur = start;
  for (int f = 0; f < n_frames; ++f) {
    for (int i = 0; i < spec.n_players; ++i) {
      if (f > 0) {
        cur[i].x = detail::reflect(cur[i].x + sigma * step(rng), 0.0, court.width);
        cur[i].y = detail::reflect(cur[i].y + sigma * step(rng), 0.0, court.depth);
      }
      gt_rows.push_back({f, ids[i], ids[i], cur[i], attrs[i]});
    }
  }

  nlohmann::json events = nlohmann::json::array();
  std::vector<detail::SynthRow> rows = gt_rows;
  int next_id = spec.n_players + 1;
  std::map<int, std::string> clutter_zone;
  const std::set<int> player_ids(ids.begin(), ids.end());
  auto require_track = [&](int t, const char* what) {
    if (!player_ids.count(t)) throw SynthError(std::string(what) + ": unknown track " + std::to_string(t));
  };
  auto require_frame = [&](int f, const char* what) {
    if (f < 0 || f >= n_frames) throw SynthError(std::string(what) + ": frame outside scenario");
  };

  for (const Corruption& c : spec.corruptions) {
    if (const auto* fr = std::get_if<Fragmentation>(&c)) {
      require_track(fr->track, "fragmentation");
      require_frame(fr->frame, "fragmentation");
      const int nid = next_id++;
      for (auto& r : rows)
        if (r.origin == fr->track && r.frame >= fr->frame) r.id = nid;
      events.push_back({{"type", "fragmentation"}, {"track", fr->track}, {"frame", fr->frame}, {"new_id", nid}});
    } else if (const auto* ex = std::get_if<IdExchange>(&c)) {
      require_track(ex->track_a, "id_exchange");
      require_track(ex->track_b, "id_exchange");
      require_frame(ex->frame, "id_exchange");
      if (ex->track_a == ex->track_b) throw SynthError("id_exchange between identical tracks");
      // IDs each track carries at the exchange frame (or latest before it).
      auto id_at = [&](int origin) {
        int id = -1, best_frame = -1;
        for (const auto& r : rows)
          if (r.origin == origin && r.frame <= ex->frame && r.frame > best_frame) {
            best_frame = r.frame;
            id = r.id;
          }
        return id;
      };
      const int ida = id_at(ex->track_a);
      const int idb = id_at(ex->track_b);
      if (ida < 0 || idb < 0 || ida == idb) throw SynthError("id_exchange: tracks have no distinct IDs at frame");
      for (auto& r : rows) {
        if (r.frame < ex->frame) continue;
        if (r.origin == ex->track_a && r.id == ida) r.id = idb;
        else if (r.origin == ex->track_b && r.id == idb) r.id = ida;
      }
      events.push_back({{"type", "id_exchange"},
                        {"track_a", ex->track_a},
                        {"track_b", ex->track_b},
                        {"frame", ex->frame},
                        {"ids", {ida, idb}}});
    } else if (const auto* ln = std::get_if<LocNoise>(&c)) {
      if (ln->sigma < 0) throw SynthError("loc_noise sigma must be >= 0");
      for (auto& r : rows) {
        r.pos.x += ln->sigma * step(rng);
        r.pos.y += ln->sigma * step(rng);
      }
      events.push_back({{"type", "loc_noise"}, {"sigma", ln->sigma}});
    } else if (const auto* dr = std::get_if<Dropout>(&c)) {
      if (dr->rate < 0 || dr->rate > 1) throw SynthError("dropout rate must be in [0,1]");
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<detail::SynthRow> kept;
      long removed = 0;
      for (auto& r : rows) {
        if (u(rng) < dr->rate) ++removed;
        else kept.push_back(r);
      }
      rows = std::move(kept);
      events.push_back({{"type", "dropout"}, {"rate", dr->rate}, {"removed", removed}});
    } else if (const auto* cl = std::get_if<ClutterTrack>(&c)) {
      if (cl->length <= 0) throw SynthError("clutter_track length must be positive");
      const int length = std::min(cl->length, n_frames);
      std::uniform_int_distribution<int> first_frame(0, n_frames - length);
      const int f0 = first_frame(rng);
      const Rect area = court.bounds().expanded(7.5);
      std::uniform_real_distribution<double> ux(area.x0, area.x1), uy(area.y0, area.y1);
      CourtPoint p;
      int tries = 0;
      do {
        p = {ux(rng), uy(rng)};
        if (++tries > 100000) throw SynthError("clutter_track: zone has no room");
      } while (!detail::in_clutter_zone(court, p, cl->zone));
      const int cid = next_id++;
      const IdentityAttributes a = detail::random_attrs(spec.mode, rng);
      for (int f = f0; f < f0 + length; ++f) {
        if (f > f0) {
          const CourtPoint q{p.x + sigma * step(rng), p.y + sigma * step(rng)};
          if (detail::in_clutter_zone(court, q, cl->zone)) p = q;
        }
        rows.push_back({f, cid, cid, p, spec.mode == Mode::drone ? std::nullopt : std::optional(a)});
      }
      clutter_zone[cid] = std::string(detail::zone_name(cl->zone));
      events.push_back({{"type", "clutter_track"},
                        {"zone", detail::zone_name(cl->zone)},
                        {"id", cid},
                        {"first_frame", f0},
                        {"length", length}});
    } else if (const auto* af = std::get_if<AttrFlip>(&c)) {
      require_track(af->track, "attr_flip");
      require_frame(af->frame, "attr_flip");
      if (spec.mode == Mode::drone) throw SynthError("attr_flip needs an attributed mode");
      for (auto& r : rows)
        if (r.origin == af->track && r.frame >= af->frame && r.attrs)
          r.attrs->team = r.attrs->team == Team::offense ? Team::defense : Team::offense;
      events.push_back({{"type", "attr_flip"}, {"track", af->track}, {"frame", af->frame}});
    }
  }

  auto to_detections = [&](const std::vector<detail::SynthRow>& rs) {
    std::vector<Detection> out;
    out.reserve(rs.size());
    for (const auto& r : rs) out.push_back({r.frame, r.id, box_at(sc.court_to_image, r.pos), r.pos, r.attrs, std::nullopt});
    return out;
  };
  const FrameRange range{0, n_frames - 1};
  sc.gt = SequenceData(spec.mode, to_detections(gt_rows), range, n_frames);
  sc.pred = SequenceData(spec.mode, to_detections(rows), range, n_frames);

  if (spec.mode == Mode::outdoor) {
    std::map<int, std::map<int, int>> origin_votes;  // pred id -> origin -> rows
    std::map<int, std::vector<int>> frames_of;
    for (const auto& r : rows) {
      ++origin_votes[r.id][r.origin];
      frames_of[r.id].push_back(r.frame);
    }
    std::map<int, IdentityAttributes> player_attrs;
    for (int i = 0; i < 6; ++i) player_attrs[ids[i]] = *attrs[i];
    const std::array<int, 3> offense_color{200, 40, 40}, defense_color{40, 60, 200}, neutral{128, 128, 128};
    for (const auto& [pid, votes] : origin_votes) {
      const int origin = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                           return a.second < b.second;
                         })->first;
      const auto it = player_attrs.find(origin);
      JerseyPrediction j{pid, std::nullopt};
      std::array<int, 3> color = neutral;
      if (it != player_attrs.end()) {
        j.number = std::get<JerseyNumber>(it->second.role).value;
        color = it->second.team == Team::offense ? offense_color : defense_color;
      }
      sc.jerseys.push_back(j);
      std::vector<int>& fs = frames_of[pid];
      std::sort(fs.begin(), fs.end());
      for (std::size_t k = 0; k < fs.size() && static_cast<int>(k) < spec.crops_per_track; ++k)
        sc.crops[pid].push_back({fs[k], detail::bib_crop(color, rng)});
    }
  }

  nlohmann::json gt_ids = nlohmann::json::array();
  for (int i = 0; i < spec.n_players; ++i) {
    nlohmann::json p = {{"id", ids[i]}, {"start", {start[i].x, start[i].y}}};
    gt_ids.push_back(p);
  }
  sc.manifest = {{"seed", spec.seed},
                 {"mode", to_string(spec.mode)},
                 {"n_frames", n_frames},
                 {"n_players", spec.n_players},
                 {"court", court_to_json(court)},
                 {"players", gt_ids},
                 {"events", events}};
  return sc;
}

inline std::string_view zone_name(Zone z) { return detail::zone_name(z); }

inline std::optional<Zone> parse_zone(std::string_view s) {
  for (Zone z : {Zone::on_court, Zone::outside_3m, Zone::endline_band, Zone::coffin_corner})
    if (detail::zone_name(z) == s) return z;
  return std::nullopt;
}

}  // namespace trackid
