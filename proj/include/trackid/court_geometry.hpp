#pragma once

// Court model, image-to-court homography and the zone predicates used by the
// non-player exclusion rules.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trackid/csv.hpp"
#include "trackid/error.hpp"
#include "trackid/types.hpp"

namespace trackid {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool contains(const Point2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains(const Rect& r) const { return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1; }
  /// Euclidean distance to the rectangle; 0 inside.
  double distance(const Point2& p) const {
    const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
    const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
    return std::hypot(dx, dy);
  }
  Rect expanded(double m) const { return {x0 - m, y0 - m, x1 + m, y1 + m}; }
  Point2 clamp(const Point2& p) const { return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)}; }
};

/// Court of `width` (end-line length) by `depth` meters. The end line runs
/// along the x-axis at y = 0; with `end_lines == 2` the line at y = depth is
/// an end line as well.
struct CourtModel {
  double width = 15.05;
  double depth = 9.50;
  Rect paint{};
  int end_lines = 1;

  static constexpr double kPaintWidth = 4.9;
  static constexpr double kPaintDepth = 5.8;

  static CourtModel make(double width, double depth, double paint_width = kPaintWidth,
                         double paint_depth = kPaintDepth, int end_lines = 1) {
    CourtModel c;
    c.width = width;
    c.depth = depth;
    c.paint = {(width - paint_width) / 2, 0.0, (width + paint_width) / 2, paint_depth};
    c.end_lines = end_lines;
    c.validate();
    return c;
  }
  static CourtModel indoor() { return make(15.05, 9.50); }
  static CourtModel outdoor() { return make(15.05, 11.05); }
  static CourtModel for_mode(Mode m) { return m == Mode::outdoor ? outdoor() : indoor(); }

  Rect bounds() const { return {0.0, 0.0, width, depth}; }
  CourtPoint end_line_midpoint() const { return {width / 2, 0.0}; }
  /// Midpoint of the court line parallel to the end line (top of the half court).
  CourtPoint top_midpoint() const { return {width / 2, depth}; }
  CourtPoint free_throw_midpoint() const { return {width / 2, paint.y1}; }

  void validate() const {
    if (!(width > 0) || !(depth > 0)) throw GeometryError("court dimensions must be positive");
    if (!(paint.x1 > paint.x0) || !(paint.y1 > paint.y0) || !bounds().contains(paint))
      throw GeometryError("paint area must be a non-empty rectangle inside the court");
    if (end_lines != 1 && end_lines != 2) throw GeometryError("end_lines must be 1 or 2");
  }
};

enum class Zone { on_court, outside_3m, endline_band, coffin_corner };

/// Distances behind the zone predicates, in meters.
struct ZoneParams {
  double detection_buffer_m = 3.0;
  double endline_outer_m = 3.0;
  double endline_inner_m = 1.0;
  double coffin_endline_dist_m = 10.0;
};

inline bool zone_test(const CourtModel& court, const CourtPoint& p, Zone zone, const ZoneParams& zp = {}) {
  const Rect b = court.bounds();
  switch (zone) {
    case Zone::on_court: return b.contains(p);
    case Zone::outside_3m: return b.distance(p) > zp.detection_buffer_m;
    case Zone::endline_band: {
      const double lateral = zp.detection_buffer_m;
      if (p.x < -lateral || p.x > court.width + lateral) return false;
      if (p.y >= -zp.endline_outer_m && p.y <= zp.endline_inner_m) return true;
      return court.end_lines == 2 && p.y >= court.depth - zp.endline_inner_m &&
             p.y <= court.depth + zp.endline_outer_m;
    }
    case Zone::coffin_corner: {
      const bool outside_paint_lines = p.x < court.paint.x0 || p.x > court.paint.x1;
      double from_end_line = std::abs(p.y);
      if (court.end_lines == 2) from_end_line = std::min(from_end_line, std::abs(court.depth - p.y));
      return outside_paint_lines && from_end_line > zp.coffin_endline_dist_m;
    }
  }
  return false;
}

/// Projective map between image and court planes, stored with H(2,2) = 1.
class Homography {
 public:
  Homography() : h_(Eigen::Matrix3d::Identity()) {}

  explicit Homography(const Eigen::Matrix3d& h) {
    if (!h.allFinite()) throw GeometryError("homography has non-finite entries");
    if (std::abs(h(2, 2)) < 1e-12 * h.cwiseAbs().maxCoeff())
      throw GeometryError("homography cannot be normalized (H[2][2] is zero)");
    h_ = h / h(2, 2);
    if (std::abs(h_.determinant()) <= 1e-12) throw GeometryError("homography is singular");
  }

  static Homography from_rows(const std::array<std::array<double, 3>, 3>& rows) {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
    return Homography(m);
  }

  const Eigen::Matrix3d& matrix() const { return h_; }
  Homography inverse() const { return Homography(h_.inverse()); }

  Point2 project(const Point2& p) const {
    const Eigen::Vector3d q = h_ * Eigen::Vector3d(p.x, p.y, 1.0);
    const double scale = std::abs(h_(2, 0) * p.x) + std::abs(h_(2, 1) * p.y) + 1.0;
    if (std::abs(q.z()) < 1e-12 * scale) throw GeometryError("point projects to infinity");
    return {q.x() / q.z(), q.y() / q.z()};
  }

 private:
  Eigen::Matrix3d h_;
};

struct Correspondence {
  PixelPoint image;
  CourtPoint court;
};

struct HomographyFit {
  Homography homography;
  std::vector<double> residuals;  // per-correspondence court-plane error, meters
  double rmse = 0.0;
  double max_residual = 0.0;
};

namespace detail {

// Similarity taking the points to zero centroid and mean distance sqrt(2).
inline Eigen::Matrix3d normalizing_transform(std::span<const Point2> pts) {
  double cx = 0, cy = 0;
  for (const Point2& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= pts.size();
  cy /= pts.size();
  double mean_dist = 0;
  for (const Point2& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= pts.size();
  if (!(mean_dist > 0)) throw GeometryError("degenerate configuration: all points coincide");
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

inline bool collinear(const Point2& a, const Point2& b, const Point2& c, double scale) {
  const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return std::abs(cross) <= 1e-10 * scale * scale;
}

inline void check_minimal_configuration(std::span<const Point2> pts) {
  double scale = 0;
  for (const Point2& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  scale = std::max(scale, 1.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k)
        if (collinear(pts[i], pts[j], pts[k], scale))
          throw GeometryError("degenerate configuration: three of four points are collinear");
}

}  // namespace detail

/// Normalized direct linear transform over all correspondences (least squares
/// when more than four).
inline HomographyFit fit_homography(std::span<const Correspondence> corr) {
  if (corr.size() < 4)
    throw GeometryError("need at least 4 correspondences, got " + std::to_string(corr.size()));
  std::vector<Point2> img, crt;
  for (const Correspondence& c : corr) {
    if (!std::isfinite(c.image.x) || !std::isfinite(c.image.y) || !std::isfinite(c.court.x) ||
        !std::isfinite(c.court.y))
      throw GeometryError("non-finite correspondence");
    img.push_back(c.image);
    crt.push_back(c.court);
  }
  if (corr.size() == 4) {
    detail::check_minimal_configuration(img);
    detail::check_minimal_configuration(crt);
  }
  const Eigen::Matrix3d t_img = detail::normalizing_transform(img);
  const Eigen::Matrix3d t_crt = detail::normalizing_transform(crt);

  const Eigen::Index n = static_cast<Eigen::Index>(corr.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = t_img * Eigen::Vector3d(img[i].x, img[i].y, 1.0);
    const Eigen::Vector3d q = t_crt * Eigen::Vector3d(crt[i].x, crt[i].y, 1.0);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  // A unique solution needs rank 8.
  if (sv.size() < 8 || sv(7) <= 1e-9 * sv(0)) throw GeometryError("degenerate configuration: rank-deficient system");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d full = t_crt.inverse() * hn * t_img;

  HomographyFit fit{Homography(full), {}, 0.0, 0.0};
  double sq = 0;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const double r = distance(fit.homography.project(img[i]), crt[i]);
    fit.residuals.push_back(r);
    sq += r * r;
    fit.max_residual = std::max(fit.max_residual, r);
  }
  fit.rmse = std::sqrt(sq / corr.size());
  return fit;
}

/// Court coordinates of the bottom-edge midpoint of the detection's box.
inline CourtPoint project_detection(const Homography& h, const Detection& det) {
  if (!(det.bbox.w > 0) || !(det.bbox.h > 0)) throw GeometryError("invalid box");
  return h.project(det.bbox.foot_point());
}

// Correspondence file: image_x,image_y,court_x,court_y

inline std::vector<Correspondence> parse_correspondence_csv(std::istream& in) {
  std::vector<Correspondence> out;
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
      if (!cells.empty() && !csv::to_double(cells[0])) continue;
    }
    if (cells.size() != 4) throw ParseError(line_no, "expected image_x,image_y,court_x,court_y");
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto d = csv::to_double(cells[i]);
      if (!d || !std::isfinite(*d)) throw ParseError(line_no, "non-numeric value '" + std::string(cells[i]) + "'");
      v[i] = *d;
    }
    out.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  return out;
}

inline void write_correspondence_csv(std::ostream& out, std::span<const Correspondence> corr) {
  out << "image_x,image_y,court_x,court_y\n";
  for (const Correspondence& c : corr)
    out << csv::format_double(c.image.x) << ',' << csv::format_double(c.image.y) << ','
        << csv::format_double(c.court.x) << ',' << csv::format_double(c.court.y) << '\n';
}

inline nlohmann::json homography_to_json(const Homography& h) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({h.matrix()(r, 0), h.matrix()(r, 1), h.matrix()(r, 2)});
  return rows;
}

/// Accepts either a bare 3x3 row-major array or an object with a
/// "homography" member holding one.
inline Homography homography_from_json(const nlohmann::json& j) {
  const nlohmann::json& rows = j.is_object() ? j.at("homography") : j;
  if (!rows.is_array() || rows.size() != 3) throw GeometryError("homography JSON must be a 3x3 array");
  std::array<std::array<double, 3>, 3> m{};
  for (int r = 0; r < 3; ++r) {
    if (!rows[r].is_array() || rows[r].size() != 3) throw GeometryError("homography JSON must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m[r][c] = rows[r][c].get<double>();
  }
  return Homography::from_rows(m);
}

inline nlohmann::json court_to_json(const CourtModel& c) {
  return {{"width", c.width},
          {"depth", c.depth},
          {"paint", {c.paint.x0, c.paint.y0, c.paint.x1, c.paint.y1}},
          {"end_lines", c.end_lines}};
}

inline CourtModel court_from_json(const nlohmann::json& j, CourtModel base = CourtModel::indoor()) {
  const double width = j.value("width", base.width);
  const double depth = j.value("depth", base.depth);
  CourtModel c = CourtModel::make(width, depth, CourtModel::kPaintWidth, CourtModel::kPaintDepth,
                                  j.value("end_lines", base.end_lines));
  if (j.contains("paint")) {
    const auto& p = j.at("paint");
    if (!p.is_array() || p.size() != 4) throw GeometryError("paint must be [x0, y0, x1, y1]");
    c.paint = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>()};
  }
  c.validate();
  return c;
}

}  // namespace trackid
