#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace bmap {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Wraps an angle to the half-open interval [-pi, pi).
double wrap_angle(double a);

// Planar pose; phi is kept normalized to [-pi, pi).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double phi_) : x(x_), y(y_), phi(wrap_angle(phi_)) {}

  Eigen::Vector2d position() const { return {x, y}; }
};

// Relative pose measurement with 3x3 covariance (symmetric positive definite).
struct RelativeMeasurement {
  double dx = 0.0;
  double dy = 0.0;
  double dphi = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();

  Eigen::Vector3d mean() const { return {dx, dy, dphi}; }
};

bool is_spd(const Eigen::Matrix3d& m, double tol = 0.0);

// Pose compounding: relative pose of p_j expressed in the frame of p_i.
RelativeMeasurement compound_diff(const Pose& p_i, const Pose& p_j);

// Inverse of compound_diff: applies a relative increment to p_i.
Pose compound_apply(const Pose& p_i, const RelativeMeasurement& xi);

// Simple closed polygon; closure between last and first vertex is implicit.
struct MapPolygon {
  std::vector<Eigen::Vector2d> vertices;

  double perimeter() const;
};

double polygon_area(const MapPolygon& p);
double polygon_intersection_area(const MapPolygon& a, const MapPolygon& b);
double polygon_union_area(const MapPolygon& a, const MapPolygon& b);
Eigen::Vector2d polygon_centroid(const MapPolygon& p);

// Normalizes orientation to CCW (positive signed area). Throws on degenerate input.
MapPolygon normalize_polygon(const MapPolygon& p);

}  // namespace bmap
