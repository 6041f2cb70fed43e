#pragma once

#include "boundarymap/loop_closure.hpp"

namespace bmap {

// Points sampled along a path neighborhood, expressed in the frame where the
// anchor pose is the origin with zero heading. Ordered by arc length.
struct NeighborhoodCloud {
  std::vector<Eigen::Vector2d> points;
};

struct IcpConfig {
  double spacing = 0.25;  // arc-length sample spacing, meters
  int max_iters = 50;
  double tol = 1e-6;  // mean-residual change threshold, meters
};

struct IcpResult {
  double beta = 0.0;                       // rotation angle
  Eigen::Vector2d t = {0.0, 0.0};          // translation
  double residual = 0.0;                   // final mean point distance
  bool converged = false;
  int iterations = 0;
};

// Samples the path at fixed arc-length spacing within +-L_NH of the center
// vertex, in the center pose's frame. Throws if the neighborhood is truncated
// by the path ends.
NeighborhoodCloud extract_cloud(const std::vector<Pose>& path,
                                const OrientationProfile& profile, int center_index,
                                double L_NH, double spacing);

// Point-to-point ICP: finds (beta, t) such that R(beta)*a + t ~= b.
// Correspondences are single nearest neighbors capped at 3x the current mean
// residual; the rigid fit per iteration is the closed-form 2-D Procrustes
// solution.
IcpResult icp(const NeighborhoodCloud& a, const NeighborhoodCloud& b,
              int max_iters = 50, double tol = 1e-6);

// Loop-closure constraint from an ICP alignment: mean (t_x, t_y, beta),
// covariance diag(gamma1, gamma1, gamma2) * max(c_ij, 1e-6).
RelativeMeasurement closure_constraint(double beta, const Eigen::Vector2d& t, double c_ij,
                                       double gamma1, double gamma2);

// Fills in the constraint of each closure. In original mode (the pre-ICP
// baseline) the mean is forced to zero and only the covariance rule applies.
void fill_closure_constraints(std::vector<LoopClosure>& closures,
                              const std::vector<Pose>& path,
                              const OrientationProfile& profile, double L_NH,
                              double gamma1, double gamma2, const IcpConfig& icp_cfg,
                              bool original_mode);

}  // namespace bmap
