#include "boundarymap/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include <cmath>

namespace bmap {

namespace bg = boost::geometry;
using BoostPoint = bg::model::d2::point_xy<double>;
using BoostPolygon = bg::model::polygon<BoostPoint>;
using BoostMultiPolygon = bg::model::multi_polygon<BoostPolygon>;

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

bool is_spd(const Eigen::Matrix3d& m, double tol) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  return es.eigenvalues().minCoeff() > tol;
}

RelativeMeasurement compound_diff(const Pose& p_i, const Pose& p_j) {
  const double c = std::cos(p_i.phi), s = std::sin(p_i.phi);
  const double ex = p_j.x - p_i.x, ey = p_j.y - p_i.y;
  RelativeMeasurement xi;
  xi.dx = c * ex + s * ey;
  xi.dy = -s * ex + c * ey;
  xi.dphi = wrap_angle(p_j.phi - p_i.phi);
  return xi;
}

Pose compound_apply(const Pose& p_i, const RelativeMeasurement& xi) {
  const double c = std::cos(p_i.phi), s = std::sin(p_i.phi);
  return Pose(p_i.x + c * xi.dx - s * xi.dy,
              p_i.y + s * xi.dx + c * xi.dy,
              p_i.phi + xi.dphi);
}

double MapPolygon::perimeter() const {
  double len = 0.0;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) len += (vertices[(i + 1) % n] - vertices[i]).norm();
  return len;
}

namespace {

double signed_area(const MapPolygon& p) {
  double a = 0.0;
  const size_t n = p.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& u = p.vertices[i];
    const auto& v = p.vertices[(i + 1) % n];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

BoostPolygon to_boost(const MapPolygon& p) {
  BoostPolygon out;
  for (const auto& v : p.vertices) bg::append(out.outer(), BoostPoint(v.x(), v.y()));
  if (!p.vertices.empty())
    bg::append(out.outer(), BoostPoint(p.vertices.front().x(), p.vertices.front().y()));
  bg::correct(out);
  return out;
}

void check_polygon(const MapPolygon& p) {
  if (p.vertices.size() < 3) throw std::invalid_argument("polygon needs >= 3 vertices");
  if (std::abs(signed_area(p)) < 1e-12) throw std::invalid_argument("degenerate polygon");
}

}  // namespace

double polygon_area(const MapPolygon& p) {
  check_polygon(p);
  return std::abs(signed_area(p));
}

double polygon_intersection_area(const MapPolygon& a, const MapPolygon& b) {
  check_polygon(a);
  check_polygon(b);
  BoostMultiPolygon out;
  bg::intersection(to_boost(a), to_boost(b), out);
  return bg::area(out);
}

double polygon_union_area(const MapPolygon& a, const MapPolygon& b) {
  check_polygon(a);
  check_polygon(b);
  BoostMultiPolygon out;
  bg::union_(to_boost(a), to_boost(b), out);
  return bg::area(out);
}

Eigen::Vector2d polygon_centroid(const MapPolygon& p) {
  check_polygon(p);
  BoostPoint c;
  bg::centroid(to_boost(p), c);
  return {c.x(), c.y()};
}

MapPolygon normalize_polygon(const MapPolygon& p) {
  check_polygon(p);
  MapPolygon out = p;
  if (signed_area(p) < 0.0) std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

}  // namespace bmap
