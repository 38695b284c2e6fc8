#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "trackid/pose_metrics.hpp"

using namespace trackid;

namespace {

// Upright pose with shoulders (x0-1, y0), (x0+1, y0) and center (x0, y0+4): torso 4.
PoseFrame upright(int frame, int player, double x0 = 10, double y0 = 10) {
  PoseFrame p{frame, player, {}};
  const std::array<std::pair<double, double>, kNumKeypoints> offs = {
      {{0, -2}, {-1, 0}, {1, 0}, {-2, 2}, {2, 2}, {-2, 4}, {2, 4}, {0, 4}, {-1, 9}, {1, 9}}};
  for (std::size_t k = 0; k < kNumKeypoints; ++k) p.keypoints[k] = {x0 + offs[k].first, y0 + offs[k].second, true};
  return p;
}

std::vector<PoseFrame> poses(int n) {
  std::vector<PoseFrame> out;
  for (int i = 0; i < n; ++i) out.push_back(upright(i / 2, i % 2, 10.0 + 7 * i, 20.0 + i));
  return out;
}

std::vector<PoseFrame> scaled(std::vector<PoseFrame> v, double s) {
  for (PoseFrame& p : v)
    for (ImagePoint& k : p.keypoints) {
      k.x *= s;
      k.y *= s;
    }
  return v;
}

}  // namespace

TEST(TorsoLength, Examples) {
  PoseFrame p{};
  p[Keypoint::l_shoulder] = {0, 0, true};
  p[Keypoint::r_shoulder] = {2, 0, true};
  p[Keypoint::center] = {1, 4, true};
  EXPECT_DOUBLE_EQ(torso_length(p), 4.0);
  p[Keypoint::center] = {1, 0, true};
  EXPECT_EQ(torso_length(p), 0.0);
  p[Keypoint::r_shoulder].visible = false;
  EXPECT_THROW(torso_length(p), MetricError);
}

TEST(TorsoLength, RandomAgainstRecomputation) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 100; ++i) {
    PoseFrame p{};
    const double ax = u(rng), ay = u(rng), bx = u(rng), by = u(rng), cx = u(rng), cy = u(rng);
    p[Keypoint::l_shoulder] = {ax, ay, true};
    p[Keypoint::r_shoulder] = {bx, by, true};
    p[Keypoint::center] = {cx, cy, true};
    const double mx = 0.5 * ax + 0.5 * bx, my = 0.5 * ay + 0.5 * by;
    EXPECT_NEAR(torso_length(p), std::sqrt((mx - cx) * (mx - cx) + (my - cy) * (my - cy)), 1e-12);
  }
}

TEST(Pdj, PerfectPrediction) {
  const auto gt = poses(8);
  const PdjResult r = pdj(gt, gt);
  for (double rate : r.rate) EXPECT_EQ(rate, 1.0);
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.paired, 8);
  EXPECT_DOUBLE_EQ(pdj_auc(gt, gt), 0.5);
}

TEST(Pdj, ThresholdIsStrict) {
  const auto gt = poses(1);
  auto pred = gt;
  pred[0][Keypoint::head].x += 2.0;  // exactly half the torso length of 4
  const PdjResult r = pdj(pred, gt);
  EXPECT_EQ(r.rate[static_cast<std::size_t>(Keypoint::head)], 0.0);
  pred[0][Keypoint::head].x -= 1e-9;
  EXPECT_EQ(pdj(pred, gt).rate[static_cast<std::size_t>(Keypoint::head)], 1.0);
}

TEST(Pdj, KnownCorruptedFraction) {
  std::mt19937_64 rng(12);
  const auto gt = poses(20);
  for (int n_bad : {0, 30, 60, 137, 200}) {
    auto pred = gt;
    std::vector<int> slots(200);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    for (int s = 0; s < n_bad; ++s) pred[slots[s] / 10].keypoints[slots[s] % 10].y += 9.0;
    const PdjResult r = pdj(pred, gt);
    EXPECT_NEAR(r.mean * 100, (1.0 - n_bad / 200.0) * 100, 1e-12) << n_bad;
  }
}

TEST(Pdj, InvisibleKeypoints) {
  const auto gt_base = poses(2);
  auto gt = gt_base;
  gt[0][Keypoint::l_wrist].visible = false;
  auto pred = gt_base;
  pred[1][Keypoint::r_wrist].visible = false;
  const PdjResult r = pdj(pred, gt);
  EXPECT_EQ(r.visible[static_cast<std::size_t>(Keypoint::l_wrist)], 1);
  EXPECT_EQ(r.rate[static_cast<std::size_t>(Keypoint::l_wrist)], 1.0);
  EXPECT_EQ(r.rate[static_cast<std::size_t>(Keypoint::r_wrist)], 0.5);
}

TEST(Pdj, UnpairedAndDegenerate) {
  auto gt = poses(4);
  auto pred = gt;
  pred.pop_back();
  pred.push_back(upright(50, 0));
  PoseFrame flat = upright(60, 0);
  flat[Keypoint::center] = {flat[Keypoint::l_shoulder].x + 1, flat[Keypoint::l_shoulder].y, true};
  gt.push_back(flat);
  pred.push_back(flat);
  const PdjResult r = pdj(pred, gt);
  EXPECT_EQ(r.paired, 3);
  EXPECT_EQ(r.unpaired, 2);
  EXPECT_EQ(r.degenerate, 1);
  EXPECT_THROW(pdj(std::vector<PoseFrame>{flat}, std::vector<PoseFrame>{flat}), MetricError);
  auto dup = gt;
  dup.push_back(gt[0]);
  EXPECT_THROW(pdj(dup, dup), MetricError);
}

TEST(PdjAuc, StepFunctions) {
  const auto gt = poses(6);
  auto far = gt;
  for (PoseFrame& p : far)
    for (ImagePoint& k : p.keypoints) k.x += 40;
  EXPECT_EQ(pdj_auc(far, gt), 0.0);
  auto quarter = gt;
  for (PoseFrame& p : quarter)
    for (ImagePoint& k : p.keypoints) k.x += 1.0;  // error 0.25 of the torso
  EXPECT_NEAR(pdj_auc(quarter, gt), 0.25, 1e-12);
}

TEST(Pdj, ScaleInvariant) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1.5);
  const auto gt = poses(10);
  auto pred = gt;
  for (PoseFrame& p : pred)
    for (ImagePoint& k : p.keypoints) {
      k.x += n(rng);
      k.y += n(rng);
    }
  const PdjResult a = pdj(pred, gt);
  const PdjResult b = pdj(scaled(pred, 8.0), scaled(gt, 8.0));
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(pdj_auc(pred, gt), pdj_auc(scaled(pred, 8.0), scaled(gt, 8.0)));
}
