#pragma once

#include "boundarymap/geometry.hpp"
#include "boundarymap/pose_graph.hpp"

#include <cstdint>

namespace bmap {

struct SimConfig {
  MapPolygon map;
  double speed = 0.3;         // m/s
  double sample_rate = 20.0;  // Hz
  double duration = 2000.0;   // s
  OdomNoiseParams noise;
  std::uint64_t seed = 0;
};

struct Trajectory {
  std::vector<double> timestamps;
  std::vector<Pose> true_poses;      // may be empty for recorded logs
  std::vector<Pose> measured_poses;  // odometry dead reckoning
};

// Traces the polygon boundary at constant speed; heading is tangent to the
// current segment (a vertex carries the outgoing segment heading).
Trajectory wall_follow(const SimConfig& cfg);

// Dead-reckons a noisy copy of the path: each step's (translation, rotation)
// is perturbed with zero-mean Gaussian noise whose variances follow the
// quadratic odometry motion model (alpha1*dR^2 + alpha2*dT^2 and so on).
// Deterministic given the seed.
std::vector<Pose> corrupt(const std::vector<Pose>& true_poses, const OdomNoiseParams& noise,
                          std::uint64_t seed);

// wall_follow followed by corrupt.
Trajectory simulate(const SimConfig& cfg);

}  // namespace bmap
