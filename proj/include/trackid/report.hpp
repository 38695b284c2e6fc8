#pragma once

// Report export: full JSON with per-alpha detail, one-line-per-sequence CSV
// summaries, and mean/SD aggregation across sequences.

#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "trackid/csv.hpp"
#include "trackid/metrics.hpp"
#include "trackid/pose_metrics.hpp"

namespace trackid {

inline constexpr const char* kToolName = "trackid";
inline constexpr const char* kToolVersion = "0.1.0";

struct MeanSd {
  double mean = 0;
  double sd = 0;  // sample standard deviation, 0 for a single value
};

inline MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

inline nlohmann::json alpha_to_json(const AlphaResult& a) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairAssociation& p : a.pairs)
    pairs.push_back({{"gt_id", p.gt_id}, {"pred_id", p.pred_id}, {"tpa", p.tpa}, {"fpa", p.fpa}, {"fna", p.fna}});
  return {{"alpha", a.alpha}, {"tp", a.tp},     {"fp", a.fp},     {"fn", a.fn},
          {"deta", a.deta},   {"assa", a.assa}, {"hota", a.hota}, {"pairs", pairs}};
}

inline nlohmann::json metric_report_to_json(const MetricReport& r) {
  nlohmann::json per_alpha = nlohmann::json::array();
  for (const AlphaResult& a : r.per_alpha) per_alpha.push_back(alpha_to_json(a));
  nlohmann::json j = {{"task", r.task},
                      {"hota", r.hota},
                      {"deta", r.deta},
                      {"assa", r.assa},
                      {"gt_detections", r.gt_detections},
                      {"pred_detections", r.pred_detections},
                      {"per_alpha", per_alpha},
                      {"warnings", r.warnings}};
  if (r.id_switches) j["id_switches"] = *r.id_switches;
  return j;
}

struct PoseReport {
  PdjResult pdj;
  double auc = 0;
  double threshold = 0.5;
};

inline nlohmann::json pose_report_to_json(const PoseReport& r) {
  nlohmann::json kp = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumKeypoints; ++k)
    kp[std::string(kKeypointNames[k])] = {
        {"pdj", 100.0 * r.pdj.rate[k]}, {"detected", r.pdj.detected[k]}, {"visible", r.pdj.visible[k]}};
  return {{"task", "pose"},
          {"threshold", r.threshold},
          {"mean_pdj", 100.0 * r.pdj.mean},
          {"auc", r.auc},
          {"keypoints", kp},
          {"paired", r.pdj.paired},
          {"unpaired", r.pdj.unpaired},
          {"degenerate", r.pdj.degenerate}};
}

/// One named sequence and its scores, for CSV and aggregate output.
struct SequenceScores {
  std::string sequence;
  std::vector<double> values;
};

inline std::vector<std::string> summary_columns(const std::string& task) {
  if (task == "track-id") return {"ti_hota", "ti_deta", "ti_assa"};
  if (task == "mot") return {"hota", "deta", "assa", "id_switches"};
  std::vector<std::string> cols{"mean_pdj", "auc"};
  for (std::string_view n : kKeypointNames) cols.push_back("pdj_" + std::string(n));
  return cols;
}

inline std::vector<double> summary_values(const MetricReport& r) {
  std::vector<double> v{r.hota, r.deta, r.assa};
  if (r.id_switches) v.push_back(static_cast<double>(*r.id_switches));
  return v;
}

inline std::vector<double> summary_values(const PoseReport& r) {
  std::vector<double> v{100.0 * r.pdj.mean, r.auc};
  for (double x : r.pdj.rate) v.push_back(100.0 * x);
  return v;
}

/// Header, one row per sequence, then "mean" and "sd" rows when there is more
/// than one sequence.
inline void write_summary_csv(std::ostream& out, const std::string& task, const std::vector<SequenceScores>& rows) {
  const auto cols = summary_columns(task);
  out << "sequence";
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  for (const SequenceScores& s : rows) {
    out << s.sequence;
    for (double v : s.values) out << ',' << csv::format_double(v);
    out << '\n';
  }
  if (rows.size() < 2) return;
  std::vector<MeanSd> agg;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<double> col;
    for (const SequenceScores& s : rows) col.push_back(s.values.at(c));
    agg.push_back(mean_sd(col));
  }
  out << "mean";
  for (const MeanSd& m : agg) out << ',' << csv::format_double(m.mean);
  out << "\nsd";
  for (const MeanSd& m : agg) out << ',' << csv::format_double(m.sd);
  out << '\n';
}

inline nlohmann::json aggregate_to_json(const std::string& task, const std::vector<SequenceScores>& rows) {
  const auto cols = summary_columns(task);
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<double> col;
    for (const SequenceScores& s : rows) col.push_back(s.values.at(c));
    const MeanSd m = mean_sd(col);
    j[cols[c]] = {{"mean", m.mean}, {"sd", m.sd}};
  }
  return j;
}

/// Top-level report document shared by all tasks.
inline nlohmann::json report_document(const std::string& task, nlohmann::json sequences,
                                      const std::vector<SequenceScores>& rows, const nlohmann::json& params) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"task", task},
          {"params", params},
          {"sequences", std::move(sequences)},
          {"aggregate", aggregate_to_json(task, rows)},
          {"n_sequences", rows.size()}};
}

}  // namespace trackid
