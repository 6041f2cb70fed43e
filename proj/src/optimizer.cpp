#include "boundarymap/optimizer.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace bmap {

Eigen::Vector3d edge_residual(const Pose& p_i, const Pose& p_j,
                              const RelativeMeasurement& xi) {
  const RelativeMeasurement d = compound_diff(p_i, p_j);
  return {d.dx - xi.dx, d.dy - xi.dy, wrap_angle(d.dphi - xi.dphi)};
}

void edge_jacobians(const Pose& p_i, const Pose& p_j, Eigen::Matrix3d& J_i,
                    Eigen::Matrix3d& J_j) {
  const double c = std::cos(p_i.phi), s = std::sin(p_i.phi);
  const double ex = p_j.x - p_i.x, ey = p_j.y - p_i.y;
  // d/dp_i of [R_i^T (x_j - x_i); phi_j - phi_i]
  J_i << -c, -s, -s * ex + c * ey,
          s, -c, -c * ex - s * ey,
          0.0, 0.0, -1.0;
  J_j << c, s, 0.0,
        -s, c, 0.0,
         0.0, 0.0, 1.0;
}

namespace {

std::vector<const Edge*> all_edges(const PoseGraph& g) {
  std::vector<const Edge*> edges;
  edges.reserve(g.odom_edges.size() + g.lc_edges.size());
  for (const auto& e : g.odom_edges) edges.push_back(&e);
  for (const auto& e : g.lc_edges) edges.push_back(&e);
  return edges;
}

void check_connected(const PoseGraph& g) {
  const size_t n = g.vertices.size();
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {0};
  std::vector<std::vector<int>> adj(n);
  for (const auto* e : all_edges(g)) {
    adj[static_cast<size_t>(e->i)].push_back(e->j);
    adj[static_cast<size_t>(e->j)].push_back(e->i);
  }
  size_t count = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (seen[static_cast<size_t>(v)]) continue;
    seen[static_cast<size_t>(v)] = 1;
    ++count;
    for (int w : adj[static_cast<size_t>(v)])
      if (!seen[static_cast<size_t>(w)]) stack.push_back(w);
  }
  if (count != n) throw std::runtime_error("pose graph is disconnected");
}

double eval_objective(const std::vector<Pose>& poses,
                      const std::vector<const Edge*>& edges,
                      const std::vector<Eigen::Matrix3d>& infos) {
  double obj = 0.0;
  for (size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = *edges[k];
    const Eigen::Vector3d r = edge_residual(poses[static_cast<size_t>(e.i)],
                                            poses[static_cast<size_t>(e.j)], e.meas);
    obj += r.dot(infos[k] * r);
  }
  return obj;
}

}  // namespace

double objective(const PoseGraph& g) {
  const auto edges = all_edges(g);
  std::vector<Eigen::Matrix3d> infos;
  infos.reserve(edges.size());
  for (const auto* e : edges) infos.push_back(e->meas.covariance.inverse());
  return eval_objective(g.vertices, edges, infos);
}

SolveResult optimize(const PoseGraph& g, const SolverConfig& cfg) {
  if (g.vertices.size() < 2) throw std::invalid_argument("graph too small");
  check_connected(g);
  const auto edges = all_edges(g);
  std::vector<Eigen::Matrix3d> infos;
  infos.reserve(edges.size());
  for (const auto* e : edges) {
    if (!is_spd(e->meas.covariance))
      throw std::invalid_argument("edge covariance not positive definite");
    infos.push_back(e->meas.covariance.inverse());
  }

  const int n = static_cast<int>(g.vertices.size());
  const int dof = 3 * (n - 1);  // vertex 0 anchored

  std::vector<Pose> poses = g.vertices;
  double obj = eval_objective(poses, edges, infos);

  SolveResult result;
  result.objective_history.push_back(obj);

  double lambda = cfg.damping_init;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    result.iterations = iter + 1;

    // assemble H and b over free variables (vertex index - 1)
    trips.clear();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dof);
    for (size_t k = 0; k < edges.size(); ++k) {
      const Edge& e = *edges[k];
      const Pose& pi = poses[static_cast<size_t>(e.i)];
      const Pose& pj = poses[static_cast<size_t>(e.j)];
      const Eigen::Vector3d r = edge_residual(pi, pj, e.meas);
      Eigen::Matrix3d Ji, Jj;
      edge_jacobians(pi, pj, Ji, Jj);
      const Eigen::Matrix3d& W = infos[k];
      const int bi = 3 * (e.i - 1);
      const int bj = 3 * (e.j - 1);
      if (e.i > 0) {
        const Eigen::Matrix3d Hii = Ji.transpose() * W * Ji;
        for (int r_ = 0; r_ < 3; ++r_)
          for (int c_ = 0; c_ < 3; ++c_) trips.emplace_back(bi + r_, bi + c_, Hii(r_, c_));
        b.segment<3>(bi) -= Ji.transpose() * W * r;
      }
      if (e.j > 0) {
        const Eigen::Matrix3d Hjj = Jj.transpose() * W * Jj;
        for (int r_ = 0; r_ < 3; ++r_)
          for (int c_ = 0; c_ < 3; ++c_) trips.emplace_back(bj + r_, bj + c_, Hjj(r_, c_));
        b.segment<3>(bj) -= Jj.transpose() * W * r;
      }
      if (e.i > 0 && e.j > 0) {
        const Eigen::Matrix3d Hij = Ji.transpose() * W * Jj;
        for (int r_ = 0; r_ < 3; ++r_)
          for (int c_ = 0; c_ < 3; ++c_) {
            trips.emplace_back(bi + r_, bj + c_, Hij(r_, c_));
            trips.emplace_back(bj + c_, bi + r_, Hij(r_, c_));
          }
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      // Levenberg damping with a scalar multiple of the identity keeps the
      // update equivariant under rigid transforms of the whole problem.
      auto damped = trips;
      for (int d = 0; d < dof; ++d) damped.emplace_back(d, d, lambda);
      Eigen::SparseMatrix<double> H(dof, dof);
      H.setFromTriplets(damped.begin(), damped.end());
      solver.compute(H);
      if (solver.info() != Eigen::Success) {
        lambda *= cfg.damping_scale;
        continue;
      }
      const Eigen::VectorXd delta = solver.solve(b);
      if (solver.info() != Eigen::Success || !delta.allFinite()) {
        lambda *= cfg.damping_scale;
        continue;
      }

      std::vector<Pose> trial = poses;
      for (int v = 1; v < n; ++v) {
        const int base = 3 * (v - 1);
        trial[static_cast<size_t>(v)] =
            Pose(poses[static_cast<size_t>(v)].x + delta[base],
                 poses[static_cast<size_t>(v)].y + delta[base + 1],
                 poses[static_cast<size_t>(v)].phi + delta[base + 2]);
      }
      const double trial_obj = eval_objective(trial, edges, infos);
      if (trial_obj < obj) {
        poses = std::move(trial);
        obj = trial_obj;
        result.objective_history.push_back(obj);
        lambda = std::max(lambda / cfg.damping_scale, 1e-12);
        stepped = true;
        if (delta.norm() < cfg.step_tol) result.converged = true;
        break;
      }
      lambda *= cfg.damping_scale;
      if (lambda > 1e16) break;
    }
    if (!stepped || result.converged) {
      if (!stepped) result.converged = true;  // no descent direction left
      break;
    }
  }

  result.graph = g;
  result.graph.vertices = std::move(poses);
  return result;
}

}  // namespace bmap
