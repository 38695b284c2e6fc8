#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trackid/commands.hpp"

using namespace trackid;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("trackid_cmd_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream o(p, std::ios::binary);
  o << s;
}

void write_seq(const fs::path& p, const SequenceData& s) {
  std::ofstream o(p, std::ios::binary);
  write_tracking_csv(o, s);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TRACKID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

ScenarioSpec spec(std::uint64_t seed, std::vector<Corruption> c = {}, Mode m = Mode::indoor) {
  ScenarioSpec s;
  s.seed = seed;
  s.n_frames = 120;
  s.mode = m;
  s.court = CourtModel::for_mode(m);
  if (m == Mode::drone) s.n_players = 8;
  s.corruptions = std::move(c);
  return s;
}

EvaluateOptions eval_opts(const fs::path& dir, std::vector<SequencePair> seqs, EvalTask task = EvalTask::track_id) {
  EvaluateOptions e;
  e.sequences = std::move(seqs);
  e.task = task;
  e.output_json = dir / "report.json";
  e.output_csv = dir / "summary.csv";
  return e;
}

}  // namespace

TEST(FitCourt, TooFewPointsIsUsageError) {
  const fs::path d = fresh_dir("fit3");
  write_text(d / "c.csv", "img_x,img_y,court_x,court_y\n0,0,0,0\n10,0,1,0\n0,10,0,1\n");
  std::ostringstream err;
  EXPECT_EQ(cmd_fit_court({d / "c.csv", std::nullopt, Mode::indoor, d / "h.json"}, err), kExitUsage);
  EXPECT_FALSE(fs::exists(d / "h.json"));
  EXPECT_NE(err.str().find("fit-court"), std::string::npos);
  EXPECT_EQ(run_cli("fit-court " + (d / "c.csv").string() + " -o " + (d / "h.json").string()), kExitUsage);
  EXPECT_EQ(run_cli("fit-court"), kExitUsage);
  EXPECT_EQ(run_cli("no-such-command"), kExitUsage);
}

TEST(FitCourt, SyntheticKeypoints) {
  const fs::path d = fresh_dir("fit12");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(1), d}, err), kExitOk) << err.str();
  ASSERT_EQ(cmd_fit_court({d / "correspondences.csv", std::nullopt, Mode::indoor, d / "fit.json"}, err), kExitOk)
      << err.str();
  const nlohmann::json j = load(d / "fit.json");
  EXPECT_EQ(j["n_points"], 12);
  EXPECT_LT(j["rmse"].get<double>(), 1e-6);
  EXPECT_EQ(j["direction"], "image_to_court");
  EXPECT_EQ(j["tool"], "trackid");
  const Homography fitted = homography_from_json(j["homography"]);
  const Homography truth = homography_from_json(load(d / "homography.json")["homography"]);
  const CourtPoint a = fitted.project({640, 500}), b = truth.project({640, 500});
  EXPECT_NEAR(a.x, b.x, 1e-6);
  EXPECT_NEAR(a.y, b.y, 1e-6);
}

TEST(Pipeline, OutdoorWithoutJerseysIsUsageError) {
  const fs::path d = fresh_dir("outdoor_usage");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(2, {}, Mode::outdoor), d}, err), kExitOk) << err.str();
  PipelineOptions p;
  p.tracks = d / "tracks.csv";
  p.homography = d / "homography.json";
  p.crops = d / "crops.csv";
  p.output = d / "out.csv";
  EXPECT_EQ(cmd_pipeline(p, err), kExitUsage);
  EXPECT_FALSE(fs::exists(d / "out.csv"));
}

TEST(Pipeline, MissingFirstFramePlayerFailsAtAttributes) {
  const fs::path d = fresh_dir("missing_player");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(3), d}, err), kExitOk);
  const SequenceData tracks = [&] {
    std::ifstream in(d / "tracks.csv");
    return parse_tracking_csv(in);
  }();
  std::vector<Detection> kept;
  for (const Detection& x : tracks.detections())
    if (!(x.tracklet_id == 2 && x.frame_id < 20)) kept.push_back(x);
  write_seq(d / "tracks.csv", tracks.with_detections(kept));
  PipelineOptions p;
  p.tracks = d / "tracks.csv";
  p.homography = d / "homography.json";
  p.output = d / "out.csv";
  p.dump_dir = d / "stages";
  std::ostringstream err2;
  EXPECT_EQ(cmd_pipeline(p, err2), kExitFailure);
  EXPECT_NE(err2.str().find("attributes"), std::string::npos) << err2.str();
  EXPECT_FALSE(fs::exists(d / "out.csv"));
  EXPECT_TRUE(!fs::exists(d / "stages") || fs::is_empty(d / "stages"));
}

TEST(Pipeline, EndToEndWithStageDumps) {
  const fs::path d = fresh_dir("e2e");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(4, {Fragmentation{3, 60}, ClutterTrack{Zone::coffin_corner, 80}}), d}, err), kExitOk);
  PipelineOptions p;
  p.tracks = d / "tracks.csv";
  p.homography = d / "homography.json";
  p.output = d / "out.csv";
  p.dump_dir = d / "stages";
  ASSERT_EQ(cmd_pipeline(p, err), kExitOk) << err.str();
  EXPECT_EQ(std::distance(fs::directory_iterator(d / "stages"), fs::directory_iterator{}), 8);
  EXPECT_TRUE(fs::exists(d / "stages" / "4_merge.csv"));
  ASSERT_EQ(cmd_evaluate(eval_opts(d, {{"s", d / "out.csv", d / "gt.csv"}}), err), kExitOk) << err.str();
  EXPECT_NEAR(load(d / "report.json")["sequences"][0]["hota"].get<double>(), 100.0, 1e-9);
}

TEST(Evaluate, IdenticalFilesScoreFull) {
  const fs::path d = fresh_dir("identical");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(5), d}, err), kExitOk);
  ASSERT_EQ(cmd_evaluate(eval_opts(d, {{"s", d / "gt.csv", d / "gt.csv"}}), err), kExitOk) << err.str();
  const nlohmann::json j = load(d / "report.json");
  EXPECT_EQ(j["task"], "track-id");
  EXPECT_EQ(j["version"], kToolVersion);
  for (const char* k : {"hota", "deta", "assa"}) EXPECT_EQ(j["sequences"][0][k].get<double>(), 100.0);
  EXPECT_EQ(slurp(d / "summary.csv"), "sequence,ti_hota,ti_deta,ti_assa\ns,100,100,100\n");
}

TEST(Evaluate, MotFieldsOnDroneData) {
  const fs::path d = fresh_dir("mot");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(6, {Fragmentation{2, 50}, LocNoise{0.05}}, Mode::drone), d}, err), kExitOk) << err.str();
  ASSERT_EQ(cmd_evaluate(eval_opts(d, {{"drone", d / "pred.csv", d / "gt.csv"}}, EvalTask::mot), err), kExitOk)
      << err.str();
  const nlohmann::json s = load(d / "report.json")["sequences"][0];
  for (const char* k : {"hota", "deta", "assa", "id_switches"}) EXPECT_TRUE(s.contains(k)) << k;
  EXPECT_GT(s["hota"].get<double>(), 0.0);
  EXPECT_GE(s["id_switches"].get<long>(), 1);
  EXPECT_EQ(s["per_alpha"].size(), 19u);
}

TEST(Evaluate, PoseCorruptedFraction) {
  const fs::path d = fresh_dir("pose");
  std::vector<PoseFrame> gt, pred;
  for (int i = 0; i < 10; ++i) {
    PoseFrame p{i, 1, {}};
    for (std::size_t k = 0; k < kNumKeypoints; ++k) p.keypoints[k] = {10.0 + k, 20.0 + 3.0 * k, true};
    p[Keypoint::l_shoulder] = {9, 20, true};
    p[Keypoint::r_shoulder] = {11, 20, true};
    p[Keypoint::center] = {10, 24, true};
    gt.push_back(p);
    for (std::size_t k = 0; k < 3; ++k) p.keypoints[(k + i) % kNumKeypoints].x += 50;
    pred.push_back(p);
  }
  {
    std::ofstream o(d / "gt_pose.csv");
    write_pose_csv(o, gt);
    std::ofstream q(d / "pred_pose.csv");
    write_pose_csv(q, pred);
  }
  std::ostringstream err;
  ASSERT_EQ(cmd_evaluate(eval_opts(d, {{"p", d / "pred_pose.csv", d / "gt_pose.csv"}}, EvalTask::pose), err), kExitOk)
      << err.str();
  EXPECT_NEAR(load(d / "report.json")["sequences"][0]["mean_pdj"].get<double>(), 70.0, 1e-9);
}

TEST(Evaluate, MultiSequenceMeanAndSd) {
  const fs::path d = fresh_dir("multi");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(7, {Fragmentation{1, 60}}), d / "a"}, err), kExitOk);
  ASSERT_EQ(cmd_synth({spec(8), d / "b"}, err), kExitOk);
  const auto pairs = pair_sequences({d / "a" / "pred.csv", d / "b" / "pred.csv"}, {d / "a" / "gt.csv", d / "b" / "gt.csv"});
  EXPECT_EQ(pairs[0].name, "gt_0");
  EvaluateOptions e = eval_opts(d, pairs);
  e.jobs = 2;
  ASSERT_EQ(cmd_evaluate(e, err), kExitOk) << err.str();
  const nlohmann::json j = load(d / "report.json");
  const double h0 = j["sequences"][0]["hota"], h1 = j["sequences"][1]["hota"];
  EXPECT_LT(h0, 100.0);
  EXPECT_EQ(h1, 100.0);
  EXPECT_NEAR(j["aggregate"]["ti_hota"]["mean"].get<double>(), (h0 + h1) / 2, 1e-12);
  EXPECT_NEAR(j["aggregate"]["ti_hota"]["sd"].get<double>(), std::abs(h0 - h1) / std::sqrt(2.0), 1e-9);
  const std::string csv = slurp(d / "summary.csv");
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);
  EXPECT_NE(csv.find("\nsd,"), std::string::npos);
}

TEST(Evaluate, FailureLeavesNoOutputs) {
  const fs::path d = fresh_dir("fail");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth({spec(9), d}, err), kExitOk);
  EXPECT_EQ(cmd_evaluate(eval_opts(d, {{"s", d / "tracks.csv", d / "gt.csv"}}), err), kExitFailure);
  EXPECT_FALSE(fs::exists(d / "report.json"));
  EXPECT_FALSE(fs::exists(d / "summary.csv"));
  EXPECT_EQ(cmd_evaluate(eval_opts(d, {{"s", d / "absent.csv", d / "gt.csv"}}), err), kExitFailure);
  EXPECT_THROW(pair_sequences({d / "a.csv"}, {}), UsageError);
}

TEST(Commands, RerunsAreByteIdentical) {
  const fs::path d = fresh_dir("rerun");
  std::ostringstream err;
  const ScenarioSpec s = spec(10, {Fragmentation{4, 30}, Dropout{0.05}, LocNoise{0.05}, ClutterTrack{Zone::endline_band, 40}},
                              Mode::outdoor);
  ASSERT_EQ(cmd_synth({s, d / "one"}, err), kExitOk) << err.str();
  ASSERT_EQ(cmd_synth({s, d / "two"}, err), kExitOk);
  for (const auto& e : fs::recursive_directory_iterator(d / "one")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), d / "one");
    EXPECT_EQ(slurp(e.path()), slurp(d / "two" / rel)) << rel;
  }
  for (const char* run : {"one", "two"}) {
    PipelineOptions p;
    p.tracks = d / run / "tracks.csv";
    p.homography = d / run / "homography.json";
    p.jerseys = d / run / "jerseys.csv";
    p.crops = d / run / "crops.csv";
    p.output = d / run / "out.csv";
    ASSERT_EQ(cmd_pipeline(p, err), kExitOk) << err.str();
    ASSERT_EQ(cmd_evaluate(eval_opts(d / run, {{"s", d / run / "out.csv", d / run / "gt.csv"}}), err), kExitOk);
  }
  EXPECT_EQ(slurp(d / "one" / "out.csv"), slurp(d / "two" / "out.csv"));
  EXPECT_EQ(slurp(d / "one" / "summary.csv"), slurp(d / "two" / "summary.csv"));
  EXPECT_EQ(slurp(d / "one" / "report.json"), slurp(d / "two" / "report.json"));
}

TEST(Commands, CliSynthPipelineEvaluate) {
  const fs::path d = fresh_dir("cli");
  const std::string dir = d.string();
  ASSERT_EQ(run_cli("synth -o " + dir + " --seed 12 --frames 80 --corrupt fragmentation:2:40 --corrupt "
                    "clutter_track:endline_band:60"),
            kExitOk);
  ASSERT_EQ(run_cli("pipeline " + dir + "/tracks.csv --homography " + dir + "/homography.json -o " + dir + "/out.csv"),
            kExitOk);
  ASSERT_EQ(run_cli("evaluate --pred " + dir + "/out.csv --gt " + dir + "/gt.csv --out-json " + dir +
                    "/r.json --out-csv " + dir + "/s.csv"),
            kExitOk);
  EXPECT_NEAR(load(d / "r.json")["sequences"][0]["hota"].get<double>(), 100.0, 1e-9);
  EXPECT_EQ(run_cli("synth -o " + dir + " --corrupt bogus:1"), kExitUsage);
  EXPECT_EQ(run_cli("evaluate --pred a.csv --gt b.csv --task nope"), kExitUsage);
}

TEST(Commands, ParseCorruption) {
  EXPECT_TRUE(std::holds_alternative<Fragmentation>(parse_corruption("fragmentation:3:40")));
  const auto ex = std::get<IdExchange>(parse_corruption("id_exchange:1:2:7"));
  EXPECT_EQ(ex.frame, 7);
  EXPECT_EQ(std::get<LocNoise>(parse_corruption("loc_noise:0.25")).sigma, 0.25);
  EXPECT_EQ(std::get<ClutterTrack>(parse_corruption("clutter_track:coffin_corner:300")).length, 300);
  EXPECT_EQ(std::get<AttrFlip>(parse_corruption("attr_flip:2:0")).track, 2);
  EXPECT_THROW(parse_corruption("fragmentation:3"), UsageError);
  EXPECT_THROW(parse_corruption("clutter_track:bench:3"), UsageError);
  EXPECT_THROW(parse_corruption("dropout:x"), UsageError);
}
