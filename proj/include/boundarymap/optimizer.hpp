#pragma once

#include "boundarymap/pose_graph.hpp"

namespace bmap {

struct SolverConfig {
  int max_iters = 100;
  double step_tol = 1e-8;
  double damping_init = 1e-4;
  double damping_scale = 10.0;
};

struct SolveResult {
  PoseGraph graph;
  std::vector<double> objective_history;  // accepted iterates, strictly decreasing
  bool converged = false;
  int iterations = 0;
};

// Weighted sum of squared residuals over all edges, angle components wrapped.
double objective(const PoseGraph& g);

// Per-edge residual r = (p_j (-) p_i) - xi_hat with the angle wrapped.
Eigen::Vector3d edge_residual(const Pose& p_i, const Pose& p_j,
                              const RelativeMeasurement& xi);

// Analytic Jacobians of the residual with respect to p_i and p_j.
void edge_jacobians(const Pose& p_i, const Pose& p_j, Eigen::Matrix3d& J_i,
                    Eigen::Matrix3d& J_j);

// Damped Gauss-Newton on the full pose state with sparse normal equations.
// Vertex 0 is anchored at its initial value. Throws on a disconnected graph
// or if the normal equations stay singular despite damping.
SolveResult optimize(const PoseGraph& g, const SolverConfig& cfg = SolverConfig{});

}  // namespace bmap
