#pragma once

// Attribute identification: team plus initial position from the opening
// layout (indoor), or team plus jersey number from jersey predictions and
// torso color histograms (outdoor).

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <span>
#include <vector>

#include "trackid/court_geometry.hpp"
#include "trackid/csv.hpp"
#include "trackid/error.hpp"
#include "trackid/image.hpp"
#include "trackid/types.hpp"

namespace trackid {

inline constexpr std::size_t kHistogramLevels = 8;
inline constexpr std::size_t kHistogramBins = kHistogramLevels * kHistogramLevels * kHistogramLevels;
inline constexpr std::size_t kHistogramMaxFrames = 100;

/// 8x8x8 RGB histogram, L1-normalized.
class ColorHistogram {
 public:
  using Bins = std::array<double, kHistogramBins>;

  ColorHistogram() { bins_[0] = 1.0; }

  /// Accepts bins that are already non-negative and sum to 1 within 1e-9.
  explicit ColorHistogram(const Bins& bins) : bins_(bins) {
    double sum = 0;
    for (double b : bins_) {
      if (!(b >= 0) || !std::isfinite(b)) throw Error("histogram bins must be finite and non-negative");
      sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("histogram is not L1-normalized");
  }

  /// Normalizes arbitrary non-negative weights.
  static ColorHistogram from_weights(Bins w) {
    double sum = 0;
    for (double b : w) {
      if (!(b >= 0) || !std::isfinite(b)) throw Error("histogram weights must be finite and non-negative");
      sum += b;
    }
    if (!(sum > 0)) throw Error("histogram has zero mass");
    for (double& b : w) b /= sum;
    return ColorHistogram(w);
  }

  const Bins& bins() const { return bins_; }
  double operator[](std::size_t i) const { return bins_[i]; }

  static std::size_t bin_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    constexpr int shift = 5;  // 256 / 8 levels
    return (static_cast<std::size_t>(r >> shift) * kHistogramLevels + (g >> shift)) * kHistogramLevels + (b >> shift);
  }

 private:
  Bins bins_{};
};

inline ColorHistogram image_histogram(const RgbImage& img) {
  if (img.pixel_count() == 0) throw Error("zero-pixel crop");
  if (img.pixels.size() != img.pixel_count() * 3) throw Error("crop pixel buffer has wrong size");
  ColorHistogram::Bins w{};
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    w[ColorHistogram::bin_of(img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2])] += 1.0;
  return ColorHistogram::from_weights(w);
}

struct TorsoCrop {
  int frame_id = 0;
  RgbImage image;
};

/// Per-bin median across frames (mean of the middle two for an even count).
inline ColorHistogram::Bins bin_medians(std::span<const ColorHistogram::Bins> frames) {
  ColorHistogram::Bins median{};
  if (frames.empty()) return median;
  std::vector<double> column(frames.size());
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    for (std::size_t f = 0; f < frames.size(); ++f) column[f] = frames[f][b];
    std::sort(column.begin(), column.end());
    const std::size_t n = column.size();
    median[b] = n % 2 ? column[n / 2] : (column[n / 2 - 1] + column[n / 2]) / 2;
  }
  return median;
}

/// Per-bin median of the per-frame histograms over the first 100 crops by
/// frame number, renormalized. When every median bin is zero (frames with
/// pairwise disjoint colors) the per-bin mean is used instead.
inline ColorHistogram torso_histogram(std::span<const TorsoCrop> crops) {
  if (crops.empty()) throw Error("no crops supplied");
  std::vector<const TorsoCrop*> order;
  for (const TorsoCrop& c : crops) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const TorsoCrop* a, const TorsoCrop* b) { return a->frame_id < b->frame_id; });
  if (order.size() > kHistogramMaxFrames) order.resize(kHistogramMaxFrames);

  std::vector<ColorHistogram::Bins> per_frame;
  per_frame.reserve(order.size());
  for (const TorsoCrop* c : order) per_frame.push_back(image_histogram(c->image).bins());

  const ColorHistogram::Bins median = bin_medians(per_frame);
  if (std::accumulate(median.begin(), median.end(), 0.0) > 0) return ColorHistogram::from_weights(median);
  ColorHistogram::Bins mean{};
  for (const auto& f : per_frame)
    for (std::size_t b = 0; b < kHistogramBins; ++b) mean[b] += f[b];
  return ColorHistogram::from_weights(mean);
}

/// Jensen-Shannon divergence in nats, in [0, ln 2].
inline double js_divergence(const ColorHistogram& p, const ColorHistogram& q) {
  double js = 0;
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    const double m = (p[i] + q[i]) / 2;
    const double tp = p[i] > 0 ? p[i] * std::log(p[i] / m) : 0.0;
    const double tq = q[i] > 0 ? q[i] * std::log(q[i] / m) : 0.0;
    js += 0.5 * (tp + tq);
  }
  return std::clamp(js, 0.0, std::log(2.0));
}

// Crop manifest: tracklet_id,frame_id,path (relative paths resolve against base_dir).

struct CropEntry {
  int tracklet_id = 0;
  int frame_id = 0;
  std::string path;
};

inline std::vector<CropEntry> parse_crop_manifest(std::istream& in, const std::filesystem::path& base_dir = {}) {
  std::vector<CropEntry> out;
  std::string raw;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = csv::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = csv::split(line);
    if (first_row) {
      first_row = false;
      if (!cells.empty() && !csv::to_int(cells[0])) continue;
    }
    if (cells.size() != 3) throw ParseError(line_no, "expected tracklet_id,frame_id,path");
    const auto id = csv::to_int(cells[0]);
    const auto f = csv::to_int(cells[1]);
    if (!id || !f || cells[2].empty()) throw ParseError(line_no, "invalid crop manifest row");
    std::filesystem::path p{std::string(cells[2])};
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    out.push_back({static_cast<int>(*id), static_cast<int>(*f), p.string()});
  }
  return out;
}

/// Loads the crops listed in the manifest and reduces them per tracklet.
inline std::map<int, ColorHistogram> histograms_from_manifest(std::span<const CropEntry> entries) {
  std::map<int, std::vector<TorsoCrop>> crops;
  for (const CropEntry& e : entries) crops[e.tracklet_id].push_back({e.frame_id, read_ppm(e.path)});
  std::map<int, ColorHistogram> out;
  for (const auto& [id, cs] : crops) out.emplace(id, torso_histogram(cs));
  return out;
}

inline nlohmann::json histograms_to_json(const std::map<int, ColorHistogram>& hs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, h] : hs) j[std::to_string(id)] = h.bins();
  return j;
}

inline std::map<int, ColorHistogram> histograms_from_json(const nlohmann::json& j) {
  std::map<int, ColorHistogram> out;
  for (const auto& [key, value] : j.items()) {
    const auto id = csv::to_int(key);
    if (!id) throw Error("histogram cache key '" + key + "' is not a tracklet id");
    if (!value.is_array() || value.size() != kHistogramBins)
      throw Error("histogram for tracklet " + key + " must have 512 bins");
    ColorHistogram::Bins b{};
    for (std::size_t i = 0; i < kHistogramBins; ++i) b[i] = value[i].get<double>();
    out.emplace(static_cast<int>(*id), ColorHistogram(b));
  }
  return out;
}

// Indoor.

struct PlayerPosition {
  int tracklet_id = 0;
  CourtPoint position;
};

using AttributeMap = std::map<int, IdentityAttributes>;

using PlayerPairing = std::array<std::pair<int, int>, 3>;  // indices into the sorted player list

namespace detail {

inline void enumerate_pairings(std::vector<int>& remaining, std::vector<std::pair<int, int>>& current,
                               std::vector<PlayerPairing>& out) {
  if (remaining.empty()) {
    out.push_back({current[0], current[1], current[2]});
    return;
  }
  const int first = remaining.front();
  for (std::size_t k = 1; k < remaining.size(); ++k) {
    const int partner = remaining[k];
    std::vector<int> rest;
    for (std::size_t m = 1; m < remaining.size(); ++m)
      if (m != k) rest.push_back(remaining[m]);
    current.emplace_back(first, partner);
    enumerate_pairings(rest, current, out);
    current.pop_back();
  }
}

}  // namespace detail

/// All 15 perfect matchings of six items, in lexicographic order of their pair lists.
inline std::vector<PlayerPairing> all_pairings_of_six() {
  std::vector<int> idx{0, 1, 2, 3, 4, 5};
  std::vector<std::pair<int, int>> cur;
  std::vector<PlayerPairing> out;
  detail::enumerate_pairings(idx, cur, out);
  return out;
}

/// Minimum total intra-pair distance pairing; on ties the lexicographically
/// first pair list (by position in `players`) wins.
inline PlayerPairing closest_pairing(std::span<const PlayerPosition> players) {
  if (players.size() != 6) throw AttributeError("pairing needs exactly 6 players");
  PlayerPairing best{};
  double best_cost = std::numeric_limits<double>::infinity();
  for (const PlayerPairing& p : all_pairings_of_six()) {
    double cost = 0;
    for (const auto& [a, b] : p) cost += distance(players[a].position, players[b].position);
    if (cost < best_cost - 1e-12) {
      best_cost = cost;
      best = p;
    }
  }
  return best;
}

/// Players are paired by proximity; within a pair the one nearer the end-line
/// midpoint defends. The pair whose midpoint is nearest the court's long axis
/// is "top"; of the other two, the smaller-x midpoint is "left" (as seen from
/// the end line looking into the court).
inline AttributeMap assign_indoor_attributes(std::span<const PlayerPosition> first_frame, const CourtModel& court) {
  if (first_frame.size() != 6)
    throw AttributeError("indoor attribute assignment needs exactly 6 players at the first frame, got " +
                         std::to_string(first_frame.size()));
  std::vector<PlayerPosition> players(first_frame.begin(), first_frame.end());
  std::sort(players.begin(), players.end(),
            [](const PlayerPosition& a, const PlayerPosition& b) { return a.tracklet_id < b.tracklet_id; });
  for (std::size_t i = 1; i < players.size(); ++i)
    if (players[i].tracklet_id == players[i - 1].tracklet_id) throw AttributeError("duplicate tracklet at first frame");

  const PlayerPairing pairing = closest_pairing(players);
  const CourtPoint basket = court.end_line_midpoint();
  const double axis_x = court.width / 2;

  struct PairInfo {
    int defense, offense;
    CourtPoint mid;
  };
  std::array<PairInfo, 3> pairs{};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [a, b] = pairing[k];
    const double da = distance(players[a].position, basket);
    const double db = distance(players[b].position, basket);
    const bool a_defends = da <= db;
    pairs[k] = {players[a_defends ? a : b].tracklet_id, players[a_defends ? b : a].tracklet_id,
                midpoint(players[a].position, players[b].position)};
  }
  std::size_t top = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (std::abs(pairs[k].mid.x - axis_x) < std::abs(pairs[top].mid.x - axis_x)) top = k;
  std::array<std::size_t, 2> sides{};
  std::size_t n = 0;
  for (std::size_t k = 0; k < 3; ++k)
    if (k != top) sides[n++] = k;
  if (pairs[sides[1]].mid.x < pairs[sides[0]].mid.x) std::swap(sides[0], sides[1]);

  AttributeMap out;
  auto label = [&](const PairInfo& p, InitialPosition pos) {
    out[p.defense] = {Team::defense, pos};
    out[p.offense] = {Team::offense, pos};
  };
  label(pairs[top], InitialPosition::top);
  label(pairs[sides[0]], InitialPosition::left);
  label(pairs[sides[1]], InitialPosition::right);
  return out;
}

// Outdoor.

enum class StartType { top_checkball, free_throw };

struct StartContext {
  StartType type = StartType::top_checkball;
  CourtPoint anchor;

  static StartContext make(StartType type, const CourtModel& court, double buffer_m = 3.0) {
    StartContext s{type, type == StartType::top_checkball ? court.top_midpoint() : court.free_throw_midpoint()};
    if (court.bounds().distance(s.anchor) > buffer_m) throw AttributeError("start anchor outside court buffer");
    return s;
  }
};

namespace detail {

// Court position at the clip's first frame, else at the tracklet's own first frame.
inline CourtPoint opening_position(const Tracklet& t, int clip_first_frame) {
  for (const Detection& d : t.detections) {
    if (!d.court) continue;
    if (d.frame_id == clip_first_frame) return *d.court;
  }
  for (const Detection& d : t.detections)
    if (d.court) return *d.court;
  throw AttributeError("tracklet " + std::to_string(t.id) + " has no court coordinates");
}

}  // namespace detail

/// Drops tracklets without a jersey number, seeds offense with the tracklet
/// nearest the start anchor, then fills offense with the two tracklets of
/// lowest JS divergence to the seed. For a top check-ball start the
/// tracklet nearest the seed is fixed as defense before that. All others
/// defend. Ties go to the lower tracklet ID.
inline AttributeMap assign_outdoor_attributes(std::span<const Tracklet> tracklets,
                                              std::span<const JerseyPrediction> jerseys,
                                              const std::map<int, ColorHistogram>& histograms,
                                              const StartContext& ctx) {
  std::map<int, int> number_of;
  for (const JerseyPrediction& j : jerseys)
    if (j.number) number_of[j.tracklet_id] = *j.number;

  std::vector<const Tracklet*> kept;
  int clip_first = std::numeric_limits<int>::max();
  for (const Tracklet& t : tracklets) {
    if (t.detections.empty() || !number_of.count(t.id)) continue;
    kept.push_back(&t);
    clip_first = std::min(clip_first, t.first_frame());
  }
  std::sort(kept.begin(), kept.end(), [](const Tracklet* a, const Tracklet* b) { return a->id < b->id; });
  if (kept.size() < 6)
    throw AttributeError("outdoor attribute assignment needs at least 6 tracklets with jersey numbers, got " +
                         std::to_string(kept.size()));
  for (const Tracklet* t : kept)
    if (!histograms.count(t->id)) throw AttributeError("missing color histogram for tracklet " + std::to_string(t->id));

  std::map<int, CourtPoint> pos;
  for (const Tracklet* t : kept) pos[t->id] = detail::opening_position(*t, clip_first);

  auto nearest = [&](const CourtPoint& p, const std::set<int>& exclude) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (const Tracklet* t : kept) {
      if (exclude.count(t->id)) continue;
      const double d = distance(pos[t->id], p);
      if (d < bd) {
        bd = d;
        best = t->id;
      }
    }
    return best;
  };

  std::map<int, Team> team;
  const int seed = nearest(ctx.anchor, {});
  team[seed] = Team::offense;
  std::set<int> assigned{seed};
  if (ctx.type == StartType::top_checkball) {
    const int guard = nearest(pos[seed], assigned);
    team[guard] = Team::defense;
    assigned.insert(guard);
  }
  std::vector<std::pair<double, int>> by_similarity;
  for (const Tracklet* t : kept)
    if (!assigned.count(t->id)) by_similarity.emplace_back(js_divergence(histograms.at(seed), histograms.at(t->id)), t->id);
  std::sort(by_similarity.begin(), by_similarity.end());
  for (std::size_t k = 0; k < by_similarity.size(); ++k)
    team[by_similarity[k].second] = k < 2 ? Team::offense : Team::defense;

  AttributeMap out;
  for (const auto& [id, tm] : team) out[id] = {tm, JerseyNumber{number_of.at(id)}};
  return out;
}

/// Sets attributes on every detection of an attributed tracklet and removes
/// tracklets that received none.
inline SequenceData apply_attributes(const SequenceData& seq, const AttributeMap& attrs) {
  std::vector<Detection> out;
  for (const Detection& d : seq.detections()) {
    const auto it = attrs.find(d.tracklet_id);
    if (it == attrs.end()) continue;
    Detection x = d;
    x.attrs = it->second;
    out.push_back(x);
  }
  return seq.with_detections(std::move(out));
}

/// Court positions of all tracklets present at the sequence's first frame.
inline std::vector<PlayerPosition> first_frame_positions(const SequenceData& seq) {
  std::vector<PlayerPosition> out;
  if (seq.empty()) return out;
  const int t0 = seq.detections().front().frame_id;
  for (const Detection& d : seq.detections()) {
    if (d.frame_id != t0) break;
    if (!d.court) throw AttributeError("first-frame detection lacks court coordinates");
    out.push_back({d.tracklet_id, *d.court});
  }
  return out;
}

}  // namespace trackid
