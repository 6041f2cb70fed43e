#pragma once

#include "boundarymap/pose_graph.hpp"

#include <Eigen/Core>
#include <limits>

namespace bmap {

// Accumulated heading over accumulated path length. Values are unwrapped:
// each entry adds the wrapped step difference to its predecessor, so whole
// laps show up as multiples of 2*pi.
struct OrientationProfile {
  std::vector<double> breakpoints;  // l_0 = 0, strictly increasing
  std::vector<double> values;       // phi_0 = heading of the first pose
  int dropped_segments = 0;         // zero-length segments skipped

  double total_length() const { return breakpoints.back(); }
  // theta(x): piecewise constant, value of the segment end.
  double theta(double x) const;
};

struct LoopClosureConfig {
  double L_NH = 20.0;                 // neighborhood half-length, meters
  double c_min = 1.0;                 // comparison error threshold
  double phi_cycle = 0.0;             // feasibility check parameter, [0, pi]
  int m_eval = 50;                    // evaluation points per neighborhood
};

OrientationProfile build_profile(const std::vector<Pose>& path);

// All-pairs comparison error. Entries whose neighborhood leaves the recorded
// path are invalid (NaN). all_invalid is set when no pair is comparable.
struct ComparisonMatrix {
  Eigen::MatrixXf values;  // NaN = invalid
  int first_valid = 0;     // smallest vertex index with a full neighborhood
  int last_valid = -1;
  bool all_invalid = true;
};

ComparisonMatrix comparison_matrix(const OrientationProfile& profile,
                                   const LoopClosureConfig& cfg);

// Thresholded local minima of the comparison matrix, one per suppression
// window of radius L_NH in path-length units, restricted to pairs at least
// 2*L_NH apart along the path. Constraints are left empty; icp-align fills
// them in.
std::vector<LoopClosure> detect_closures(const ComparisonMatrix& C,
                                         const OrientationProfile& profile,
                                         const LoopClosureConfig& cfg);

// Rejects pairs whose orientation difference is near an odd multiple of pi,
// the signature of recurrent symmetric structures. phi_cycle = 0 disables
// the check.
bool feasibility_check(const LoopClosure& closure, double phi_cycle);

}  // namespace bmap
