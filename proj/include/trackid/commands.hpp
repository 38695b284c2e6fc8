#pragma once

// Subcommand implementations behind the trackid binary. Each returns a
// process exit code and writes diagnostics only to `err`.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "trackid/baseline.hpp"
#include "trackid/court_geometry.hpp"
#include "trackid/error.hpp"
#include "trackid/identity.hpp"
#include "trackid/metrics.hpp"
#include "trackid/pipeline.hpp"
#include "trackid/pose_metrics.hpp"
#include "trackid/report.hpp"
#include "trackid/synth.hpp"
#include "trackid/trackdata.hpp"

namespace trackid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for bad invocations; mapped to kExitUsage.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace fs = std::filesystem;

namespace detail {

inline std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot open " + p.string());
  return in;
}

inline nlohmann::json read_json(const fs::path& p) {
  std::ifstream in = open_input(p);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

// Writes to a sibling temporary and renames, so a failed command never leaves
// a half-written file behind.
inline void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".part";
  try {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    body(out);
    out.close();
    if (!out) throw Error("write failed for " + p.string());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  fs::rename(tmp, p);
}

inline void write_json(const fs::path& p, const nlohmann::json& j) {
  write_file(p, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

// Tracks files created by a command; removes them unless committed.
class OutputSet {
 public:
  void add(const fs::path& p) { paths_.push_back(p); }
  void commit() { committed_ = true; }
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove(*it, ec);
  }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

inline int report_error(std::ostream& err, const std::string& cmd, const std::exception& e) {
  err << "trackid " << cmd << ": error: " << e.what() << '\n';
  return dynamic_cast<const UsageError*>(&e) ? kExitUsage : kExitFailure;
}

template <class F>
int guarded(std::ostream& err, const std::string& cmd, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return report_error(err, cmd, e);
  }
}

inline SequenceData load_tracking(const fs::path& p, std::optional<Mode> mode) {
  std::ifstream in = open_input(p);
  try {
    return parse_tracking_csv(in, mode);
  } catch (const Error& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

}  // namespace detail

// fit-court

struct FitCourtOptions {
  fs::path correspondences;
  std::optional<fs::path> court_file;  // JSON court dimensions
  Mode mode = Mode::indoor;
  fs::path output = "homography.json";
};

inline int cmd_fit_court(const FitCourtOptions& opt, std::ostream& err) {
  return detail::guarded(err, "fit-court", [&] {
    std::ifstream in = detail::open_input(opt.correspondences);
    std::vector<Correspondence> corr;
    try {
      corr = parse_correspondence_csv(in);
    } catch (const Error& e) {
      throw UsageError(opt.correspondences.string() + ": " + e.what());
    }
    if (corr.size() < 4)
      throw UsageError(opt.correspondences.string() + ": need at least 4 correspondences, got " +
                       std::to_string(corr.size()));
    CourtModel court = CourtModel::for_mode(opt.mode);
    if (opt.court_file) court = court_from_json(detail::read_json(*opt.court_file), court);
    HomographyFit fit;
    try {
      fit = fit_homography(corr);
    } catch (const GeometryError& e) {
      throw GeometryError(opt.correspondences.string() + ": " + e.what());
    }
    nlohmann::json j = {{"tool", kToolName},
                        {"version", kToolVersion},
                        {"direction", "image_to_court"},
                        {"homography", homography_to_json(fit.homography)},
                        {"court", court_to_json(court)},
                        {"n_points", corr.size()},
                        {"rmse", fit.rmse},
                        {"max_residual", fit.max_residual},
                        {"residuals", fit.residuals}};
    detail::write_json(opt.output, j);
    return kExitOk;
  });
}

// pipeline

struct PipelineOptions {
  fs::path tracks;
  fs::path homography;
  std::optional<fs::path> config;
  std::optional<Mode> mode;
  std::optional<fs::path> crops;    // crop manifest CSV, or histogram JSON
  std::optional<fs::path> jerseys;
  StartType start = StartType::top_checkball;
  std::optional<int> t_overlap;     // overrides config
  fs::path output = "predictions.csv";
  std::optional<fs::path> dump_dir;
};

inline int cmd_pipeline(const PipelineOptions& opt, std::ostream& err) {
  return detail::guarded(err, "pipeline", [&] {
    SequenceData tracks = detail::load_tracking(opt.tracks, opt.mode);
    const Mode mode = tracks.mode();
    if (mode == Mode::outdoor && (!opt.jerseys || !opt.crops))
      throw UsageError("outdoor mode requires --jerseys and --crops");

    const nlohmann::json hj = detail::read_json(opt.homography);
    const Homography h = homography_from_json(hj);
    CourtModel court = CourtModel::for_mode(mode);
    if (hj.is_object() && hj.contains("court")) court = court_from_json(hj.at("court"), court);

    PipelineConfig cfg = PipelineConfig::for_mode(mode);
    if (opt.config) {
      const nlohmann::json cj = detail::read_json(*opt.config);
      cfg = config_from_json(cj, cfg);
      if (cj.contains("court")) court = court_from_json(cj.at("court"), court);
    }
    if (opt.t_overlap) cfg.t_overlap = *opt.t_overlap;
    cfg.validate();

    BaselineInputs in{tracks, h, court, cfg, std::nullopt};
    if (mode == Mode::outdoor) {
      OutdoorInputs od;
      std::ifstream jin = detail::open_input(*opt.jerseys);
      od.jerseys = parse_jersey_csv(jin);
      if (opt.crops->extension() == ".json") {
        od.histograms = histograms_from_json(detail::read_json(*opt.crops));
      } else {
        std::ifstream crops_in = detail::open_input(*opt.crops);
        const auto entries = parse_crop_manifest(crops_in, opt.crops->parent_path());
        od.histograms = histograms_from_manifest(entries);
      }
      od.start = opt.start;
      in.outdoor = std::move(od);
    }

    detail::OutputSet outputs;
    StageCallback dump;
    if (opt.dump_dir) {
      dump = [&](const std::string& stage, const SequenceData& seq) {
        const auto& names = baseline_stage_names();
        const auto idx = std::find(names.begin(), names.end(), stage) - names.begin();
        const fs::path p = *opt.dump_dir / (std::to_string(idx + 1) + "_" + stage + ".csv");
        outputs.add(p);
        detail::write_file(p, [&](std::ostream& o) { write_tracking_csv(o, seq); });
      };
    }
    const SequenceData result = run_baseline(in, dump);
    outputs.add(opt.output);
    detail::write_file(opt.output, [&](std::ostream& o) { write_tracking_csv(o, result); });
    outputs.commit();
    return kExitOk;
  });
}

// evaluate

enum class EvalTask { track_id, mot, pose };

inline std::optional<EvalTask> parse_eval_task(std::string_view s) {
  if (s == "track-id") return EvalTask::track_id;
  if (s == "mot") return EvalTask::mot;
  if (s == "pose") return EvalTask::pose;
  return std::nullopt;
}

inline std::string to_string(EvalTask t) {
  return t == EvalTask::track_id ? "track-id" : t == EvalTask::mot ? "mot" : "pose";
}

struct SequencePair {
  std::string name;
  fs::path pred;
  fs::path gt;
};

struct EvaluateOptions {
  std::vector<SequencePair> sequences;
  EvalTask task = EvalTask::track_id;
  SimilarityParams similarity;
  EvalOptions eval;
  double pdj_threshold = 0.5;
  fs::path output_json = "report.json";
  fs::path output_csv = "summary.csv";
  int jobs = 1;
};

/// Names sequences by the ground-truth file stem, suffixed with the index
/// when stems collide.
inline std::vector<SequencePair> pair_sequences(const std::vector<fs::path>& preds, const std::vector<fs::path>& gts) {
  if (preds.size() != gts.size() || preds.empty())
    throw UsageError("need the same non-zero number of prediction and ground-truth files");
  std::vector<SequencePair> out;
  std::map<std::string, int> seen;
  for (const fs::path& g : gts) ++seen[g.stem().string()];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::string name = gts[i].stem().string();
    if (seen[name] > 1) name += "_" + std::to_string(i);
    out.push_back({name, preds[i], gts[i]});
  }
  return out;
}

namespace detail {

struct EvalOutcome {
  nlohmann::json json;
  std::vector<double> values;
  std::string error;
};

inline EvalOutcome evaluate_one(const EvaluateOptions& opt, const SequencePair& sp) {
  EvalOutcome o;
  try {
    if (opt.task == EvalTask::pose) {
      std::ifstream pin = open_input(sp.pred), gin = open_input(sp.gt);
      const auto pred = parse_pose_csv(pin);
      const auto gt = parse_pose_csv(gin);
      PoseReport r{pdj(pred, gt, opt.pdj_threshold), pdj_auc(pred, gt), opt.pdj_threshold};
      o.json = pose_report_to_json(r);
      o.values = summary_values(r);
    } else {
      const SequenceData pred = load_tracking(sp.pred, std::nullopt);
      const SequenceData gt = load_tracking(sp.gt, std::nullopt);
      const MetricReport r = opt.task == EvalTask::track_id
                                 ? evaluate_track_id(pred, gt, opt.similarity, opt.eval)
                                 : evaluate_mot_iou(pred, gt, opt.similarity.alphas, opt.eval);
      o.json = metric_report_to_json(r);
      o.values = summary_values(r);
    }
    o.json["sequence"] = sp.name;
  } catch (const std::exception& e) {
    o.error = sp.name + ": " + e.what();
  }
  return o;
}

}  // namespace detail

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& err) {
  return detail::guarded(err, "evaluate", [&] {
    if (opt.sequences.empty()) throw UsageError("no sequences to evaluate");
    if (opt.jobs < 1) throw UsageError("--jobs must be >= 1");
    opt.similarity.validate();
    std::vector<detail::EvalOutcome> results(opt.sequences.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < results.size(); i = next++) results[i] = detail::evaluate_one(opt, opt.sequences[i]);
    };
    const int n_threads = std::min<int>(opt.jobs, static_cast<int>(results.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string errors;
    for (const auto& r : results)
      if (!r.error.empty()) errors += (errors.empty() ? "" : "; ") + r.error;
    if (!errors.empty()) throw MetricError(errors);

    const std::string task = to_string(opt.task);
    nlohmann::json seqs = nlohmann::json::array();
    std::vector<SequenceScores> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
      seqs.push_back(results[i].json);
      rows.push_back({opt.sequences[i].name, results[i].values});
    }
    nlohmann::json params = {{"tau", opt.similarity.tau},
                             {"alphas", opt.similarity.alphas},
                             {"assa_per_pair", opt.eval.assa_per_pair}};
    if (opt.task == EvalTask::pose) params = {{"pdj_threshold", opt.pdj_threshold}};

    detail::OutputSet outputs;
    outputs.add(opt.output_json);
    detail::write_json(opt.output_json, report_document(task, seqs, rows, params));
    outputs.add(opt.output_csv);
    detail::write_file(opt.output_csv, [&](std::ostream& o) { write_summary_csv(o, task, rows); });
    outputs.commit();
    return kExitOk;
  });
}

// synth

/// Parses "fragmentation:TRACK:FRAME", "id_exchange:A:B:FRAME",
/// "loc_noise:SIGMA", "dropout:RATE", "clutter_track:ZONE:LENGTH" and
/// "attr_flip:TRACK:FRAME".
inline Corruption parse_corruption(std::string_view text) {
  const auto parts = csv::split(text, ':');
  auto need = [&](std::size_t n) {
    if (parts.size() != n) throw UsageError("malformed corruption '" + std::string(text) + "'");
  };
  auto integer = [&](std::size_t i) {
    const auto v = csv::to_int(parts[i]);
    if (!v) throw UsageError("malformed corruption '" + std::string(text) + "'");
    return static_cast<int>(*v);
  };
  auto real = [&](std::size_t i) {
    const auto v = csv::to_double(parts[i]);
    if (!v) throw UsageError("malformed corruption '" + std::string(text) + "'");
    return *v;
  };
  const std::string_view kind = parts[0];
  if (kind == "fragmentation") return need(3), Fragmentation{integer(1), integer(2)};
  if (kind == "id_exchange") return need(4), IdExchange{integer(1), integer(2), integer(3)};
  if (kind == "loc_noise") return need(2), LocNoise{real(1)};
  if (kind == "dropout") return need(2), Dropout{real(1)};
  if (kind == "attr_flip") return need(3), AttrFlip{integer(1), integer(2)};
  if (kind == "clutter_track") {
    need(3);
    const auto z = parse_zone(parts[1]);
    if (!z) throw UsageError("unknown zone '" + std::string(parts[1]) + "'");
    return ClutterTrack{*z, integer(2)};
  }
  throw UsageError("unknown corruption '" + std::string(kind) + "'");
}

struct SynthOptions {
  ScenarioSpec spec;
  fs::path output_dir = "synth";
};

/// Writes gt.csv, pred.csv, tracks.csv (pred without court positions or
/// attributes, as a tracker would emit), manifest.json, homography.json,
/// correspondences.csv and, outdoors, jerseys.csv plus crops/.
inline int cmd_synth(const SynthOptions& opt, std::ostream& err) {
  return detail::guarded(err, "synth", [&] {
    const Scenario sc = generate_scenario(opt.spec);
    const fs::path& dir = opt.output_dir;
    detail::OutputSet outputs;
    auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
      outputs.add(dir / name);
      detail::write_file(dir / name, body);
    };
    emit("gt.csv", [&](std::ostream& o) { write_tracking_csv(o, sc.gt); });
    emit("pred.csv", [&](std::ostream& o) { write_tracking_csv(o, sc.pred); });
    std::vector<Detection> raw(sc.pred.detections().begin(), sc.pred.detections().end());
    for (Detection& d : raw) {
      d.court.reset();
      d.attrs.reset();
    }
    const SequenceData tracks(sc.pred.mode(), std::move(raw), sc.pred.frame_range(), sc.pred.total_frames());
    emit("tracks.csv", [&](std::ostream& o) { write_tracking_csv(o, tracks); });
    nlohmann::json manifest = sc.manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    emit("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
    const nlohmann::json hj = {{"tool", kToolName},
                               {"version", kToolVersion},
                               {"direction", "image_to_court"},
                               {"homography", homography_to_json(sc.image_to_court)},
                               {"court", court_to_json(opt.spec.court)}};
    emit("homography.json", [&](std::ostream& o) { o << hj.dump(2) << '\n'; });
    emit("correspondences.csv", [&](std::ostream& o) { write_correspondence_csv(o, sc.correspondences); });
    if (opt.spec.mode == Mode::outdoor) {
      emit("jerseys.csv", [&](std::ostream& o) { write_jersey_csv(o, sc.jerseys); });
      std::ostringstream manifest_csv;
      manifest_csv << "tracklet_id,frame_id,path\n";
      for (const auto& [id, crops] : sc.crops)
        for (const TorsoCrop& c : crops) {
          const std::string rel = "crops/" + std::to_string(id) + "_" + std::to_string(c.frame_id) + ".ppm";
          emit(rel, [&](std::ostream& o) { write_ppm(o, c.image); });
          manifest_csv << id << ',' << c.frame_id << ',' << rel << '\n';
        }
      emit("crops.csv", [&](std::ostream& o) { o << manifest_csv.str(); });
    }
    outputs.commit();
    return kExitOk;
  });
}

}  // namespace trackid
