#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "trackid/trackid.hpp"

namespace {

using namespace trackid;

const std::map<std::string, Mode> kModes = {{"indoor", Mode::indoor}, {"outdoor", Mode::outdoor}, {"drone", Mode::drone}};
const std::map<std::string, StartType> kStarts = {{"top", StartType::top_checkball},
                                                  {"free-throw", StartType::free_throw}};
const std::map<std::string, EvalTask> kTasks = {
    {"track-id", EvalTask::track_id}, {"mot", EvalTask::mot}, {"pose", EvalTask::pose}};

// Settings read from a synth config file; command-line flags win.
void apply_synth_config(const nlohmann::json& j, ScenarioSpec& s) {
  static const std::set<std::string> kKeys = {"seed",  "n_frames",   "n_players",       "mode", "start",
                                              "court", "step_sigma", "crops_per_track", "corruptions"};
  for (const auto& [k, v] : j.items())
    if (!kKeys.count(k)) throw UsageError("unknown synth config key '" + k + "'");
  s.seed = j.value("seed", s.seed);
  s.n_frames = j.value("n_frames", s.n_frames);
  s.n_players = j.value("n_players", s.n_players);
  s.crops_per_track = j.value("crops_per_track", s.crops_per_track);
  s.motion.step_sigma = j.value("step_sigma", s.motion.step_sigma);
  if (j.contains("mode")) {
    const auto m = parse_mode(j.at("mode").get<std::string>());
    if (!m) throw UsageError("unknown mode in synth config");
    s.mode = *m;
    s.court = CourtModel::for_mode(s.mode);
  }
  if (j.contains("start")) {
    const auto it = kStarts.find(j.at("start").get<std::string>());
    if (it == kStarts.end()) throw UsageError("unknown start in synth config");
    s.start = it->second;
  }
  if (j.contains("court")) s.court = court_from_json(j.at("court"), s.court);
  for (const auto& c : j.value("corruptions", nlohmann::json::array())) s.corruptions.push_back(parse_corruption(c.get<std::string>()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Court-plane tracking with identity attributes: fitting, baseline pipeline, evaluation, synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  FitCourtOptions fit;
  std::string fit_mode = "indoor";
  auto* fit_cmd = app.add_subcommand("fit-court", "Fit the image-to-court homography from keypoint correspondences");
  fit_cmd->add_option("correspondences", fit.correspondences, "CSV of image_x,image_y,court_x,court_y")->required();
  fit_cmd->add_option("--court", fit.court_file, "JSON court dimensions");
  fit_cmd->add_option("--mode", fit_mode, "Court preset")->check(CLI::IsMember({"indoor", "outdoor", "drone"}));
  fit_cmd->add_option("-o,--out", fit.output, "Output homography JSON");

  PipelineOptions pipe;
  std::string pipe_mode, pipe_start = "top";
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run the baseline on raw tracker output");
  pipe_cmd->add_option("tracks", pipe.tracks, "Tracking CSV")->required();
  pipe_cmd->add_option("--homography", pipe.homography, "Homography JSON from fit-court")->required();
  pipe_cmd->add_option("--config", pipe.config, "Pipeline config JSON");
  pipe_cmd->add_option("--mode", pipe_mode, "Override the file's mode")->check(CLI::IsMember({"indoor", "outdoor", "drone"}));
  pipe_cmd->add_option("--crops", pipe.crops, "Crop manifest CSV or histogram JSON (outdoor)");
  pipe_cmd->add_option("--jerseys", pipe.jerseys, "Jersey prediction CSV (outdoor)");
  pipe_cmd->add_option("--start", pipe_start, "Outdoor possession start")->check(CLI::IsMember({"top", "free-throw"}));
  pipe_cmd->add_option("--t-overlap", pipe.t_overlap, "Overlap threshold for ID-switch merging");
  pipe_cmd->add_option("-o,--out", pipe.output, "Output predictions CSV");
  pipe_cmd->add_option("--dump-stages", pipe.dump_dir, "Directory for per-stage CSV dumps");

  EvaluateOptions eval;
  std::vector<fs::path> preds, gts;
  std::string task = "track-id";
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  eval_cmd->add_option("--pred", preds, "Prediction file (repeatable)")->required();
  eval_cmd->add_option("--gt", gts, "Ground-truth file (repeatable, same order)")->required();
  eval_cmd->add_option("--task", task, "track-id, mot or pose")->check(CLI::IsMember({"track-id", "mot", "pose"}));
  eval_cmd->add_option("--tau", eval.similarity.tau, "Localization tolerance in meters")->capture_default_str();
  eval_cmd->add_flag("--assa-per-pair", eval.eval.assa_per_pair, "Average association over distinct pairs");
  eval_cmd->add_option("--pdj-threshold", eval.pdj_threshold, "PDJ threshold in torso lengths")->capture_default_str();
  eval_cmd->add_option("--out-json", eval.output_json, "Report JSON")->capture_default_str();
  eval_cmd->add_option("--out-csv", eval.output_csv, "Summary CSV")->capture_default_str();
  eval_cmd->add_option("--jobs", eval.jobs, "Sequences evaluated in parallel")->capture_default_str();

  SynthOptions synth;
  std::optional<fs::path> synth_config;
  std::optional<std::uint64_t> seed;
  std::optional<int> frames, players, crops_per_track;
  std::optional<double> step_sigma;
  std::optional<std::string> synth_mode, synth_start;
  std::vector<std::string> corruptions;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth_cmd->add_option("-o,--out", synth.output_dir, "Output directory")->capture_default_str();
  synth_cmd->add_option("--config", synth_config, "Scenario JSON");
  synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->add_option("--frames", frames, "Number of frames");
  synth_cmd->add_option("--players", players, "Number of players (drone mode only may differ from 6)");
  synth_cmd->add_option("--mode", synth_mode, "Attribute scheme")->check(CLI::IsMember({"indoor", "outdoor", "drone"}));
  synth_cmd->add_option("--start", synth_start, "Outdoor possession start")->check(CLI::IsMember({"top", "free-throw"}));
  synth_cmd->add_option("--step-sigma", step_sigma, "Random-walk step in m/frame");
  synth_cmd->add_option("--crops-per-track", crops_per_track, "Torso crops per tracklet (outdoor)");
  synth_cmd->add_option("--corrupt", corruptions,
                        "fragmentation:T:F, id_exchange:A:B:F, loc_noise:S, dropout:R, clutter_track:ZONE:LEN, "
                        "attr_flip:T:F (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*fit_cmd) {
    fit.mode = kModes.at(fit_mode);
    return cmd_fit_court(fit, std::cerr);
  }
  if (*pipe_cmd) {
    if (!pipe_mode.empty()) pipe.mode = kModes.at(pipe_mode);
    pipe.start = kStarts.at(pipe_start);
    return cmd_pipeline(pipe, std::cerr);
  }
  if (*eval_cmd) {
    eval.task = kTasks.at(task);
    try {
      eval.sequences = pair_sequences(preds, gts);
    } catch (const std::exception& e) {
      std::cerr << "trackid evaluate: error: " << e.what() << '\n';
      return kExitUsage;
    }
    return cmd_evaluate(eval, std::cerr);
  }
  if (*synth_cmd) {
    try {
      ScenarioSpec& s = synth.spec;
      if (synth_config) {
        std::ifstream in(*synth_config);
        if (!in) throw UsageError("cannot open " + synth_config->string());
        apply_synth_config(nlohmann::json::parse(in), s);
      }
      if (synth_mode) {
        s.mode = kModes.at(*synth_mode);
        s.court = CourtModel::for_mode(s.mode);
      }
      if (seed) s.seed = *seed;
      if (frames) s.n_frames = *frames;
      if (players) s.n_players = *players;
      if (crops_per_track) s.crops_per_track = *crops_per_track;
      if (step_sigma) s.motion.step_sigma = *step_sigma;
      if (synth_start) s.start = kStarts.at(*synth_start);
      for (const std::string& c : corruptions) s.corruptions.push_back(parse_corruption(c));
    } catch (const std::exception& e) {
      std::cerr << "trackid synth: error: " << e.what() << '\n';
      return kExitUsage;
    }
    return cmd_synth(synth, std::cerr);
  }
  return kExitUsage;
}
