#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <sstream>

#include "trackid/court_geometry.hpp"

using namespace trackid;

namespace {

Point2 apply(const Eigen::Matrix3d& h, const Point2& p) {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x, p.y, 1);
  return {q.x() / q.z(), q.y() / q.z()};
}

// Image -> court map of a plausible fixed camera: pixels to meters with a
// random rotation, offset and mild perspective.
Eigen::Matrix3d random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  const double s = 0.015 * (1 + 0.3 * u(rng));
  const double th = 0.3 * u(rng);
  Eigen::Matrix3d h;
  h << s * std::cos(th), -s * std::sin(th) * (1 + 0.2 * u(rng)), 5 + 3 * u(rng),  //
      s * std::sin(th), s * std::cos(th), 2 + 3 * u(rng),                          //
      2e-4 * u(rng), 2e-4 * u(rng), 1;
  return h;
}

std::vector<Correspondence> unit_square(double scale) {
  return {{{0, 0}, {0, 0}}, {{1, 0}, {scale, 0}}, {{1, 1}, {scale, scale}}, {{0, 1}, {0, scale}}};
}

}  // namespace

TEST(FitHomography, UnitSquareToItselfIsIdentity) {
  const auto fit = fit_homography(unit_square(1));
  EXPECT_TRUE(fit.homography.matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-9));
  EXPECT_LT((fit.homography.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(fit.rmse, 1e-12);
}

TEST(FitHomography, ScaledSquareIsDiagonal) {
  const auto fit = fit_homography(unit_square(2));
  Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
  expected(0, 0) = expected(1, 1) = 2;
  EXPECT_LT((fit.homography.matrix() - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FitHomography, SixNoisyCorrespondencesBelowNoise) {
  std::mt19937_64 rng(5);
  const Eigen::Matrix3d h = random_camera(rng);
  const Eigen::Matrix3d hinv = h.inverse();
  const double sigma = 0.02;
  std::normal_distribution<double> n(0, sigma / std::sqrt(2.0));
  std::vector<Correspondence> corr;
  for (const CourtPoint p : {CourtPoint{0, 0}, {15, 0}, {15, 9.5}, {0, 9.5}, {5, 5.8}, {10, 5.8}}) {
    corr.push_back({apply(hinv, p), {p.x + n(rng), p.y + n(rng)}});
  }
  const auto fit = fit_homography(corr);
  EXPECT_LT(fit.rmse, sigma);
}

TEST(FitHomography, ExactCorrespondencesRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(0, 15.05), uy(0, 9.5), far(-50, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Matrix3d h = random_camera(rng);
    const Eigen::Matrix3d hinv = h.inverse();
    std::vector<Correspondence> corr;
    for (int i = 0; i < 12; ++i) {
      const CourtPoint p{ux(rng), uy(rng)};
      corr.push_back({apply(hinv, p), p});
    }
    const auto fit = fit_homography(corr);
    EXPECT_LT(fit.max_residual, 1e-6);
    const Homography inv = fit.homography.inverse();
    for (int i = 0; i < 20; ++i) {
      const Point2 p{far(rng), far(rng)};
      EXPECT_LT(distance(inv.project(fit.homography.project(p)), p), 1e-6);
    }
  }
}

TEST(FitHomography, OrderInvariant) {
  std::mt19937_64 rng(2);
  const Eigen::Matrix3d hinv = random_camera(rng).inverse();
  std::vector<Correspondence> corr;
  for (const CourtPoint p : {CourtPoint{0, 0}, {15, 0}, {15, 9.5}, {0, 9.5}, {5, 5.8}, {10, 5.8}, {7.5, 2}})
    corr.push_back({apply(hinv, p), {p.x + 0.01 * p.y, p.y - 0.02 * p.x}});
  const auto a = fit_homography(corr);
  std::shuffle(corr.begin(), corr.end(), rng);
  const auto b = fit_homography(corr);
  EXPECT_LT((a.homography.matrix() - b.homography.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(a.rmse, b.rmse, 1e-12);
}

TEST(FitHomography, TooFewRejected) {
  auto c = unit_square(1);
  c.pop_back();
  EXPECT_THROW(fit_homography(c), GeometryError);
}

TEST(FitHomography, DegenerateRejected) {
  const std::vector<Correspondence> collinear = {
      {{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{2, 0}, {2, 0}}, {{0, 1}, {0, 1}}};
  EXPECT_THROW(fit_homography(collinear), GeometryError);
  std::vector<Correspondence> line;
  for (int i = 0; i < 6; ++i) line.push_back({{double(i), 2.0 * i}, {double(i), 0}});
  EXPECT_THROW(fit_homography(line), GeometryError);
  const std::vector<Correspondence> same(5, Correspondence{{1, 1}, {2, 2}});
  EXPECT_THROW(fit_homography(same), GeometryError);
}

TEST(Homography, NormalizedAndInvertible) {
  Eigen::Matrix3d m;
  m << 2, 0, 4, 0, 2, 6, 0, 0, 2;
  const Homography h(m);
  EXPECT_DOUBLE_EQ(h.matrix()(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(h.matrix()(0, 2), 2.0);
  Eigen::Matrix3d sing = Eigen::Matrix3d::Zero();
  sing(2, 2) = 1;
  EXPECT_THROW(Homography{sing}, GeometryError);
}

TEST(Homography, PointAtInfinityRejected) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1;  // w = x + 1
  const Homography h(m);
  EXPECT_THROW(h.project({-1, 5}), GeometryError);
}

TEST(ProjectDetection, IdentityUsesBottomMidpoint) {
  const Detection d{0, 1, {10, 20, 30, 60}, {}, {}, {}};
  const CourtPoint p = project_detection(Homography(), d);
  EXPECT_DOUBLE_EQ(p.x, 25);
  EXPECT_DOUBLE_EQ(p.y, 80);
}

TEST(ProjectDetection, Scaling) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = m(1, 1) = 0.5;
  const CourtPoint p = project_detection(Homography(m), Detection{0, 1, {0, 0, 4, 4}, {}, {}, {}});
  EXPECT_DOUBLE_EQ(p.x, 1);
  EXPECT_DOUBLE_EQ(p.y, 2);
}

TEST(ProjectDetection, FittedCameraHitsKeypoint) {
  std::mt19937_64 rng(4);
  const Eigen::Matrix3d hinv = random_camera(rng).inverse();
  const CourtModel court = CourtModel::indoor();
  std::vector<Correspondence> corr;
  for (const CourtPoint p : {CourtPoint{0, 0}, {court.width, 0}, {court.width, court.depth}, {0, court.depth},
                             {court.paint.x0, court.paint.y1}, {court.paint.x1, court.paint.y1}})
    corr.push_back({apply(hinv, p), p});
  const auto fit = fit_homography(corr);
  const PixelPoint corner = corr[4].image;
  const Detection d{0, 1, {corner.x - 15, corner.y - 80, 30, 80}, {}, {}, {}};
  const CourtPoint p = project_detection(fit.homography, d);
  EXPECT_NEAR(p.x, court.paint.x0, 1e-6 + fit.max_residual);
  EXPECT_NEAR(p.y, court.paint.y1, 1e-6 + fit.max_residual);
}

TEST(Zones, CourtCenter) {
  const CourtModel c = CourtModel::indoor();
  const CourtPoint center{c.width / 2, c.depth / 2};
  EXPECT_TRUE(zone_test(c, center, Zone::on_court));
  EXPECT_FALSE(zone_test(c, center, Zone::outside_3m));
  EXPECT_FALSE(zone_test(c, center, Zone::endline_band));
  EXPECT_FALSE(zone_test(c, center, Zone::coffin_corner));
}

TEST(Zones, OutsideBuffer) {
  const CourtModel c = CourtModel::indoor();
  EXPECT_TRUE(zone_test(c, {-4, 5}, Zone::outside_3m));
  EXPECT_TRUE(zone_test(c, {c.width + 4, 5}, Zone::outside_3m));
  EXPECT_TRUE(zone_test(c, {-3.01, 5}, Zone::outside_3m));
  EXPECT_FALSE(zone_test(c, {-3.0, 5}, Zone::outside_3m));
  // Corner regions use Euclidean distance to the rectangle.
  EXPECT_FALSE(zone_test(c, {-2, -2}, Zone::outside_3m));
  EXPECT_TRUE(zone_test(c, {-2.5, -2.5}, Zone::outside_3m));
  // The open side of a half court counts as an outer line.
  EXPECT_TRUE(zone_test(c, {7, c.depth + 3.5}, Zone::outside_3m));
}

TEST(Zones, EndlineBand) {
  const CourtModel c = CourtModel::indoor();
  EXPECT_TRUE(zone_test(c, {7, 0.5}, Zone::endline_band));
  EXPECT_TRUE(zone_test(c, {7, 1.0}, Zone::endline_band));
  EXPECT_FALSE(zone_test(c, {7, 1.01}, Zone::endline_band));
  EXPECT_TRUE(zone_test(c, {7, -3.0}, Zone::endline_band));
  EXPECT_FALSE(zone_test(c, {7, -3.01}, Zone::endline_band));
  EXPECT_TRUE(zone_test(c, {-2.9, -1}, Zone::endline_band));
  EXPECT_FALSE(zone_test(c, {-3.1, -1}, Zone::endline_band));
  EXPECT_FALSE(zone_test(c, {7, c.depth - 0.5}, Zone::endline_band));
  CourtModel full = CourtModel::outdoor();
  full.end_lines = 2;
  EXPECT_TRUE(zone_test(full, {7, full.depth - 0.5}, Zone::endline_band));
  EXPECT_TRUE(zone_test(full, {7, full.depth + 2}, Zone::endline_band));
}

TEST(Zones, CoffinCorner) {
  const CourtModel c = CourtModel::outdoor();
  const double x = c.paint.x0 - 2;
  EXPECT_TRUE(zone_test(c, {x, 11}, Zone::coffin_corner));
  EXPECT_TRUE(zone_test(c, {c.paint.x1 + 2, 11}, Zone::coffin_corner));
  EXPECT_FALSE(zone_test(c, {c.width / 2, 11}, Zone::coffin_corner));
  EXPECT_FALSE(zone_test(c, {x, 10.0}, Zone::coffin_corner));
  EXPECT_FALSE(zone_test(c, {c.paint.x0, 11}, Zone::coffin_corner));
}

TEST(Zones, OnCourtNeverOutsideBuffer) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-10, 25), uy(-10, 20);
  const CourtModel c = CourtModel::outdoor();
  for (int i = 0; i < 10000; ++i) {
    const CourtPoint p{ux(rng), uy(rng)};
    if (zone_test(c, p, Zone::on_court)) { EXPECT_FALSE(zone_test(c, p, Zone::outside_3m)); }
  }
}

TEST(CourtModel, Presets) {
  const CourtModel in = CourtModel::indoor();
  EXPECT_DOUBLE_EQ(in.width, 15.05);
  EXPECT_DOUBLE_EQ(in.depth, 9.50);
  EXPECT_DOUBLE_EQ(CourtModel::outdoor().depth, 11.05);
  EXPECT_NEAR(in.paint.x1 - in.paint.x0, 4.9, 1e-12);
  EXPECT_DOUBLE_EQ(in.paint.y1, 5.8);
  EXPECT_NEAR((in.paint.x0 + in.paint.x1) / 2, in.width / 2, 1e-12);
  EXPECT_THROW(CourtModel::make(3, 3), GeometryError);
  EXPECT_THROW(CourtModel::make(-1, 9), GeometryError);
}

TEST(CourtIo, CorrespondenceAndJsonRoundTrip) {
  const auto corr = unit_square(3);
  std::ostringstream out;
  write_correspondence_csv(out, corr);
  std::istringstream in(out.str());
  const auto back = parse_correspondence_csv(in);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[2].court, corr[2].court);

  const auto fit = fit_homography(corr);
  const Homography h = homography_from_json(homography_to_json(fit.homography));
  EXPECT_TRUE(h.matrix().isApprox(fit.homography.matrix()));
  const Homography wrapped = homography_from_json(nlohmann::json{{"homography", homography_to_json(h)}});
  EXPECT_TRUE(wrapped.matrix().isApprox(h.matrix()));
  EXPECT_THROW(homography_from_json(nlohmann::json::array({1, 2, 3})), GeometryError);

  CourtModel c = CourtModel::outdoor();
  c.end_lines = 2;
  const CourtModel c2 = court_from_json(court_to_json(c));
  EXPECT_EQ(c2.depth, c.depth);
  EXPECT_EQ(c2.end_lines, 2);
  EXPECT_EQ(c2.paint.x0, c.paint.x0);
}

TEST(CourtIo, MalformedCorrespondence) {
  std::istringstream in("image_x,image_y,court_x,court_y\n1,2,3\n");
  EXPECT_THROW(parse_correspondence_csv(in), ParseError);
}
