#pragma once

#include "boundarymap/geometry.hpp"

#include <string>

namespace bmap {

// Noise gains of the odometry motion model (alpha1..alpha4 >= 0).
struct OdomNoiseParams {
  double alpha1 = 0.0849;
  double alpha2 = 0.0412;
  double alpha3 = 0.0316;
  double alpha4 = 0.0173;
};

struct Edge {
  int i = 0;
  int j = 0;
  RelativeMeasurement meas;
};

// Vertices plus N odometric edges (consecutive indices) and M loop-closure
// edges (non-consecutive, i < j). Treated as an immutable value.
struct PoseGraph {
  std::vector<Pose> vertices;
  std::vector<Edge> odom_edges;
  std::vector<Edge> lc_edges;
};

// Diagonal covariance of a single odometric step, given the heading of the
// source pose and the step's translation/rotation magnitudes. Entries are
// floored at kCovarianceFloor and taken in absolute value so the result is
// always positive definite.
constexpr double kCovarianceFloor = 1e-8;
Eigen::Matrix3d odom_covariance(const Pose& prev, double delta_T, double delta_R,
                                const OdomNoiseParams& a);

// Chains the path into a graph with odometric edges only.
PoseGraph build_graph(const std::vector<Pose>& path,
                      const OdomNoiseParams& a = OdomNoiseParams{});

struct LoopClosure {
  int i = 0;
  int j = 0;
  double c_ij = 0.0;     // comparison error
  double u_ij = 0.0;     // path distance between the pair, meters
  double dphi_ij = 0.0;  // unwrapped orientation difference
  RelativeMeasurement constraint;
};

// Returns a copy of the graph with the closures added as lc edges.
// Throws on invalid indices, consecutive pairs, duplicates or non-PD covariance.
PoseGraph add_loop_closures(const PoseGraph& g, const std::vector<LoopClosure>& closures);

std::string graph_to_json(const PoseGraph& g);
PoseGraph graph_from_json(const std::string& text);

}  // namespace bmap
