#pragma once

// Readers and writers for the tracking, pose and jersey CSV formats.
//
// Tracking CSV:
//   #mode=indoor|outdoor|drone      (optional pragma)
//   #frames=N                       (optional; total frame count of the clip)
//   #range=FIRST,LAST               (optional; clip frame range)
//   frame_id,tracklet_id,x,y,w,h[,court_x,court_y,team,role,conf]
// Optional columns may appear in any order after the required six and may be
// left empty per row.

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "trackid/csv.hpp"
#include "trackid/error.hpp"
#include "trackid/types.hpp"

namespace trackid {

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct TrackingParseResult {
  SequenceData sequence;
  std::vector<ParseIssue> issues;  // rejected rows, one issue each
  std::size_t data_rows = 0;       // non-blank, non-pragma rows after the header
};

namespace detail {

enum class TrackColumn { frame_id, tracklet_id, x, y, w, h, court_x, court_y, team, role, conf };

inline std::optional<TrackColumn> track_column(std::string_view name) {
  static const std::map<std::string_view, TrackColumn> kColumns = {
      {"frame_id", TrackColumn::frame_id}, {"tracklet_id", TrackColumn::tracklet_id},
      {"x", TrackColumn::x},               {"y", TrackColumn::y},
      {"w", TrackColumn::w},               {"h", TrackColumn::h},
      {"court_x", TrackColumn::court_x},   {"court_y", TrackColumn::court_y},
      {"team", TrackColumn::team},         {"role", TrackColumn::role},
      {"conf", TrackColumn::conf}};
  const auto it = kColumns.find(name);
  if (it == kColumns.end()) return std::nullopt;
  return it->second;
}

struct RowError {
  std::string message;
};

inline Detection parse_track_row(const std::vector<std::string_view>& cells, const std::vector<TrackColumn>& cols,
                                 Mode mode) {
  if (cells.size() != cols.size())
    throw RowError{"expected " + std::to_string(cols.size()) + " columns, got " + std::to_string(cells.size())};
  Detection d;
  std::optional<double> cx, cy;
  std::optional<Team> team;
  std::string_view role;
  auto number = [&](std::size_t i, std::string_view what) {
    const auto v = csv::to_double(cells[i]);
    if (!v || !std::isfinite(*v)) throw RowError{"non-numeric " + std::string(what) + " '" + std::string(cells[i]) + "'"};
    return *v;
  };
  auto integer = [&](std::size_t i, std::string_view what) {
    const auto v = csv::to_int(cells[i]);
    if (!v) throw RowError{"non-integer " + std::string(what) + " '" + std::string(cells[i]) + "'"};
    return static_cast<int>(*v);
  };
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const bool blank = cells[i].empty();
    switch (cols[i]) {
      case TrackColumn::frame_id: d.frame_id = integer(i, "frame_id"); break;
      case TrackColumn::tracklet_id: d.tracklet_id = integer(i, "tracklet_id"); break;
      case TrackColumn::x: d.bbox.x = number(i, "x"); break;
      case TrackColumn::y: d.bbox.y = number(i, "y"); break;
      case TrackColumn::w: d.bbox.w = number(i, "w"); break;
      case TrackColumn::h: d.bbox.h = number(i, "h"); break;
      case TrackColumn::court_x:
        if (!blank) cx = number(i, "court_x");
        break;
      case TrackColumn::court_y:
        if (!blank) cy = number(i, "court_y");
        break;
      case TrackColumn::team:
        if (!blank) {
          team = parse_team(cells[i]);
          if (!team) throw RowError{"unknown team '" + std::string(cells[i]) + "'"};
        }
        break;
      case TrackColumn::role: role = cells[i]; break;
      case TrackColumn::conf:
        if (!blank) {
          const double c = number(i, "conf");
          if (c < 0 || c > 1) throw RowError{"confidence outside [0,1]"};
          d.confidence = c;
        }
        break;
    }
  }
  if (d.frame_id < 0) throw RowError{"negative frame_id"};
  if (!(d.bbox.w > 0) || !(d.bbox.h > 0)) throw RowError{"box width and height must be positive"};
  if (cx.has_value() != cy.has_value()) throw RowError{"court_x and court_y must both be present or both empty"};
  if (cx) d.court = CourtPoint{*cx, *cy};
  if (team.has_value() != !role.empty()) throw RowError{"team and role must both be present or both empty"};
  if (team) {
    IdentityAttributes a{*team, InitialPosition::top};
    if (mode == Mode::indoor) {
      const auto pos = parse_initial_position(role);
      if (!pos) throw RowError{"indoor role must be top, left or right, got '" + std::string(role) + "'"};
      a.role = *pos;
    } else if (mode == Mode::outdoor) {
      const auto n = csv::to_int(role);
      if (!n || *n < 0) throw RowError{"outdoor role must be a non-negative jersey number, got '" + std::string(role) + "'"};
      a.role = JerseyNumber{static_cast<int>(*n)};
    } else {
      throw RowError{"drone sequences carry no identity attributes"};
    }
    d.attrs = a;
  }
  return d;
}

inline TrackingParseResult parse_tracking(std::istream& in, std::optional<Mode> mode_arg, bool strict) {
  TrackingParseResult result;
  std::optional<Mode> pragma_mode;
  std::optional<int> frames;
  std::optional<FrameRange> range;
  std::vector<TrackColumn> cols;
  std::vector<Detection> dets;
  std::set<std::pair<int, int>> keys;
  Mode mode = mode_arg.value_or(Mode::indoor);

  auto fail = [&](std::size_t line, const std::string& msg) {
    if (strict) throw ParseError(line, msg);
    result.issues.push_back({line, msg});
  };

  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = csv::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (have_header) throw ParseError(line_no, "pragma after header");
      const std::string_view body = line.substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // plain comment
      const std::string_view key = csv::trim(body.substr(0, eq));
      const std::string_view value = csv::trim(body.substr(eq + 1));
      if (key == "mode") {
        pragma_mode = parse_mode(value);
        if (!pragma_mode) throw ParseError(line_no, "unknown mode '" + std::string(value) + "'");
        if (mode_arg && *mode_arg != *pragma_mode)
          throw ParseError(line_no, "file declares mode " + std::string(value) + " but " +
                                        std::string(to_string(*mode_arg)) + " was requested");
        mode = *pragma_mode;
      } else if (key == "frames") {
        const auto n = csv::to_int(value);
        if (!n || *n < 0) throw ParseError(line_no, "invalid frame count '" + std::string(value) + "'");
        frames = static_cast<int>(*n);
      } else if (key == "range") {
        const auto parts = csv::split(value);
        const auto a = parts.size() == 2 ? csv::to_int(parts[0]) : std::nullopt;
        const auto b = parts.size() == 2 ? csv::to_int(parts[1]) : std::nullopt;
        if (!a || !b || *a < 0 || *b < *a - 1) throw ParseError(line_no, "invalid range '" + std::string(value) + "'");
        range = FrameRange{static_cast<int>(*a), static_cast<int>(*b)};
      }
      continue;
    }
    if (!have_header) {
      have_header = true;
      std::set<TrackColumn> seen;
      for (std::string_view name : csv::split(line)) {
        const auto c = track_column(name);
        if (!c) throw ParseError(line_no, "unknown column '" + std::string(name) + "'");
        if (!seen.insert(*c).second) throw ParseError(line_no, "repeated column '" + std::string(name) + "'");
        cols.push_back(*c);
      }
      for (TrackColumn req : {TrackColumn::frame_id, TrackColumn::tracklet_id, TrackColumn::x, TrackColumn::y,
                              TrackColumn::w, TrackColumn::h})
        if (!seen.count(req)) throw ParseError(line_no, "header lacks a required column");
      continue;
    }
    ++result.data_rows;
    try {
      Detection d = parse_track_row(csv::split(line), cols, mode);
      if (range && !range->contains(d.frame_id)) throw RowError{"frame_id outside declared range"};
      if (!keys.emplace(d.frame_id, d.tracklet_id).second)
        throw RowError{"duplicate (frame_id, tracklet_id) = (" + std::to_string(d.frame_id) + ", " +
                       std::to_string(d.tracklet_id) + ")"};
      dets.push_back(std::move(d));
    } catch (const RowError& e) {
      fail(line_no, e.message);
    }
  }
  if (!have_header) throw ParseError(0, "missing header");
  try {
    result.sequence = SequenceData(mode, std::move(dets), range, frames);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  return result;
}

}  // namespace detail

/// Strict reader: the first bad row throws ParseError naming its line.
inline SequenceData parse_tracking_csv(std::istream& in, std::optional<Mode> mode = std::nullopt) {
  return detail::parse_tracking(in, mode, true).sequence;
}

/// Lenient reader: bad rows are skipped and reported, so
/// data_rows == detections + issues always holds.
inline TrackingParseResult parse_tracking_csv_lenient(std::istream& in, std::optional<Mode> mode = std::nullopt) {
  return detail::parse_tracking(in, mode, false);
}

inline SequenceData parse_tracking_csv(const std::string& text, std::optional<Mode> mode = std::nullopt) {
  std::istringstream in(text);
  return parse_tracking_csv(in, mode);
}

inline std::string role_string(const IdentityAttributes& a) {
  if (a.is_indoor()) return std::string(to_string(std::get<InitialPosition>(a.role)));
  return std::to_string(std::get<JerseyNumber>(a.role).value);
}

/// Writes every column; absent optional fields become empty cells.
inline void write_tracking_csv(std::ostream& out, const SequenceData& seq) {
  out << "#mode=" << to_string(seq.mode()) << '\n';
  out << "#frames=" << seq.total_frames() << '\n';
  out << "#range=" << seq.frame_range().first << ',' << seq.frame_range().last << '\n';
  out << "frame_id,tracklet_id,x,y,w,h,court_x,court_y,team,role,conf\n";
  for (const Detection& d : seq.detections()) {
    out << d.frame_id << ',' << d.tracklet_id << ',' << csv::format_double(d.bbox.x) << ','
        << csv::format_double(d.bbox.y) << ',' << csv::format_double(d.bbox.w) << ','
        << csv::format_double(d.bbox.h) << ',';
    if (d.court) out << csv::format_double(d.court->x) << ',' << csv::format_double(d.court->y);
    else out << ',';
    out << ',';
    if (d.attrs) out << to_string(d.attrs->team) << ',' << role_string(*d.attrs);
    else out << ',';
    out << ',';
    if (d.confidence) out << csv::format_double(*d.confidence);
    out << '\n';
  }
}

inline std::string to_tracking_csv(const SequenceData& seq) {
  std::ostringstream out;
  write_tracking_csv(out, seq);
  return out.str();
}

// Pose CSV: frame_id,player_id, then 10 x (kx,ky,kv). A header line is optional.

inline std::vector<PoseFrame> parse_pose_csv(std::istream& in) {
  std::vector<PoseFrame> out;
  std::string raw;
  std::size_t line_no = 0;
  bool first_row = true;
  constexpr std::size_t kCols = 2 + 3 * kNumKeypoints;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = csv::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = csv::split(line);
    if (first_row) {
      first_row = false;
      if (!cells.empty() && !csv::to_int(cells[0])) continue;  // header
    }
    if (cells.size() != kCols)
      throw ParseError(line_no, "expected " + std::to_string(kCols) + " columns, got " + std::to_string(cells.size()));
    PoseFrame p;
    const auto f = csv::to_int(cells[0]);
    const auto id = csv::to_int(cells[1]);
    if (!f || !id || *f < 0) throw ParseError(line_no, "invalid frame_id or player_id");
    p.frame_id = static_cast<int>(*f);
    p.player_id = static_cast<int>(*id);
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      const auto x = csv::to_double(cells[2 + 3 * k]);
      const auto y = csv::to_double(cells[3 + 3 * k]);
      const auto v = csv::to_int(cells[4 + 3 * k]);
      if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
        throw ParseError(line_no, "non-numeric coordinate for " + std::string(kKeypointNames[k]));
      if (!v || (*v != 0 && *v != 1)) throw ParseError(line_no, "visibility must be 0 or 1");
      p.keypoints[k] = {*x, *y, *v == 1};
    }
    out.push_back(p);
  }
  return out;
}

inline void write_pose_csv(std::ostream& out, std::span<const PoseFrame> poses) {
  out << "frame_id,player_id";
  for (std::string_view n : kKeypointNames) out << ',' << n << "_x," << n << "_y," << n << "_v";
  out << '\n';
  for (const PoseFrame& p : poses) {
    out << p.frame_id << ',' << p.player_id;
    for (const ImagePoint& k : p.keypoints)
      out << ',' << csv::format_double(k.x) << ',' << csv::format_double(k.y) << ',' << (k.visible ? 1 : 0);
    out << '\n';
  }
}

// Jersey predictions: tracklet_id,number with an empty number for failures.

inline std::vector<JerseyPrediction> parse_jersey_csv(std::istream& in) {
  std::vector<JerseyPrediction> out;
  std::set<int> seen;
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
    if (cells.size() != 2) throw ParseError(line_no, "expected tracklet_id,number");
    const auto id = csv::to_int(cells[0]);
    if (!id) throw ParseError(line_no, "invalid tracklet_id");
    JerseyPrediction j{static_cast<int>(*id), std::nullopt};
    if (!cells[1].empty()) {
      const auto n = csv::to_int(cells[1]);
      if (!n || *n < 0) throw ParseError(line_no, "invalid jersey number '" + std::string(cells[1]) + "'");
      j.number = static_cast<int>(*n);
    }
    if (!seen.insert(j.tracklet_id).second)
      throw ParseError(line_no, "second prediction for tracklet " + std::to_string(j.tracklet_id));
    out.push_back(j);
  }
  return out;
}

inline void write_jersey_csv(std::ostream& out, std::span<const JerseyPrediction> preds) {
  out << "tracklet_id,number\n";
  for (const JerseyPrediction& j : preds) {
    out << j.tracklet_id << ',';
    if (j.number) out << *j.number;
    out << '\n';
  }
}

/// Reduces a 17-point body layout (nose, eyes, ears, shoulders, elbows,
/// wrists, hips, knees, ankles) to the 10 evaluation keypoints. The nose is
/// the head point and the hip midpoint is the center.
inline std::array<ImagePoint, kNumKeypoints> map_coco17_to_10(std::span<const ImagePoint> kp17) {
  if (kp17.size() != 17)
    throw Error("expected 17 keypoints, got " + std::to_string(kp17.size()));
  enum : std::size_t { nose = 0, l_sho = 5, r_sho, l_elb, r_elb, l_wri, r_wri, l_hip, r_hip, l_ank = 15, r_ank };
  const ImagePoint& lh = kp17[l_hip];
  const ImagePoint& rh = kp17[r_hip];
  return {kp17[nose],  kp17[l_sho], kp17[r_sho], kp17[l_elb],
          kp17[r_elb], kp17[l_wri], kp17[r_wri], ImagePoint{(lh.x + rh.x) / 2, (lh.y + rh.y) / 2, lh.visible && rh.visible},
          kp17[l_ank], kp17[r_ank]};
}

}  // namespace trackid
