#pragma once

// The Track-ID baseline: raw tracker output in image space to court
// positions with identity attributes, through a fixed sequence of stages.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trackid/court_geometry.hpp"
#include "trackid/error.hpp"
#include "trackid/identity.hpp"
#include "trackid/pipeline.hpp"
#include "trackid/types.hpp"

namespace trackid {

struct OutdoorInputs {
  std::vector<JerseyPrediction> jerseys;
  std::map<int, ColorHistogram> histograms;
  StartType start = StartType::top_checkball;
};

struct BaselineInputs {
  SequenceData tracks;
  Homography image_to_court;
  CourtModel court = CourtModel::indoor();
  PipelineConfig config;
  std::optional<OutdoorInputs> outdoor;  // required in outdoor mode
};

inline const std::vector<std::string>& baseline_stage_names() {
  static const std::vector<std::string> kStages = {"project",     "exclude_detections", "exclude_tracklets",
                                                   "merge",       "attributes",         "interpolate",
                                                   "extrapolate", "cap"};
  return kStages;
}

using StageCallback = std::function<void(const std::string& stage, const SequenceData& seq)>;

namespace detail {

template <class F>
SequenceData run_stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace detail

/// Drone-mode sequences carry no attributes, so the attribute stage passes
/// them through unchanged.
inline SequenceData run_baseline(const BaselineInputs& in, const StageCallback& on_stage = {}) {
  const PipelineConfig& cfg = in.config;
  const CourtModel& court = in.court;
  const Mode mode = in.tracks.mode();
  cfg.validate();
  if (mode == Mode::outdoor && !in.outdoor)
    throw StageError("attributes", "outdoor mode needs jersey predictions and torso crops");

  SequenceData seq = in.tracks;
  auto step = [&](const std::string& name, auto&& f) {
    seq = detail::run_stage(name, f);
    if (on_stage) on_stage(name, seq);
  };
  step("project", [&] { return project_to_court(seq, in.image_to_court); });
  step("exclude_detections", [&] { return exclude_detections(seq, court, cfg); });
  step("exclude_tracklets", [&] { return exclude_tracklets(seq, court, cfg); });
  step("merge", [&] { return merge_id_switches(seq, court, cfg); });
  step("attributes", [&] {
    if (mode == Mode::drone) return seq;
    AttributeMap attrs;
    if (mode == Mode::indoor) {
      attrs = assign_indoor_attributes(first_frame_positions(seq), court);
    } else {
      const std::vector<Tracklet> ts = seq.tracklets();
      attrs = assign_outdoor_attributes(ts, in.outdoor->jerseys, in.outdoor->histograms,
                                        StartContext::make(in.outdoor->start, court, cfg.detection_buffer_m));
    }
    return apply_attributes(seq, attrs);
  });
  step("interpolate", [&] { return interpolate_sequence(seq); });
  step("extrapolate", [&] { return extrapolate_sequence(seq, court, cfg); });
  step("cap", [&] { return cap_detections_per_frame(seq, court, cfg); });
  return seq;
}

}  // namespace trackid
