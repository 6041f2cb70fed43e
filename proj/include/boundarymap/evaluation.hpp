#pragma once

#include "boundarymap/bayes_opt.hpp"
#include "boundarymap/pose_graph.hpp"

namespace bmap {

struct EvalReport {
  double E_trans = 0.0;
  double E_rot = 0.0;
  double delta_A = 0.0;
  std::uint64_t seed = 0;
};

// Mean squared relative displacement error over all graph edges, split into
// translational and rotational terms. Truth poses must match the vertex count.
std::pair<double, double> relative_error(const PoseGraph& estimated,
                                         const std::vector<Pose>& truth);

// 1 - IoU of the two polygons, minimized over rigid alignment (centroid
// translation plus a coarse-to-fine rotation search). align = false scores
// the polygons as given.
double area_error(const MapPolygon& estimate, const MapPolygon& truth, bool align = true);

// Extracts a single representative lap from an optimized graph: the vertex
// range of the closure whose path distance is closest to the circumference
// estimate, with small self-intersection loops removed.
struct LapPolygon {
  MapPolygon polygon;
  bool cleanup_triggered = false;
};
LapPolygon polygon_from_graph(const PoseGraph& g, const std::vector<LoopClosure>& closures,
                              double U_estimate);

}  // namespace bmap
