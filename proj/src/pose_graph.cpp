#include "boundarymap/pose_graph.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

namespace bmap {

Eigen::Matrix3d odom_covariance(const Pose& prev, double delta_T, double delta_R,
                                const OdomNoiseParams& a) {
  if (delta_T < 0.0) throw std::invalid_argument("delta_T must be >= 0");
  const double dR = std::abs(delta_R);
  const double trans_var = a.alpha3 * delta_T + a.alpha4 * dR;
  const double rot_var = a.alpha1 * dR + a.alpha2 * delta_T;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov(0, 0) = std::max(std::abs(std::cos(prev.phi)) * trans_var, kCovarianceFloor);
  cov(1, 1) = std::max(std::abs(std::sin(prev.phi)) * trans_var, kCovarianceFloor);
  cov(2, 2) = std::max(rot_var, kCovarianceFloor);
  return cov;
}

PoseGraph build_graph(const std::vector<Pose>& path, const OdomNoiseParams& a) {
  if (path.size() < 2) throw std::invalid_argument("build_graph needs >= 2 poses");
  PoseGraph g;
  g.vertices = path;
  g.odom_edges.reserve(path.size() - 1);
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    Edge e;
    e.i = static_cast<int>(k);
    e.j = static_cast<int>(k + 1);
    e.meas = compound_diff(path[k], path[k + 1]);
    const double dT = std::hypot(e.meas.dx, e.meas.dy);
    e.meas.covariance = odom_covariance(path[k], dT, e.meas.dphi, a);
    g.odom_edges.push_back(e);
  }
  return g;
}

PoseGraph add_loop_closures(const PoseGraph& g, const std::vector<LoopClosure>& closures) {
  PoseGraph out = g;
  std::set<std::pair<int, int>> seen;
  for (const auto& e : out.lc_edges) seen.emplace(e.i, e.j);
  const int n = static_cast<int>(g.vertices.size());
  for (const auto& lc : closures) {
    if (lc.i < 0 || lc.j >= n || lc.i >= lc.j)
      throw std::invalid_argument("loop closure indices out of range");
    if (lc.j == lc.i + 1) throw std::invalid_argument("loop closure on consecutive vertices");
    if (!seen.emplace(lc.i, lc.j).second)
      throw std::invalid_argument("duplicate loop closure pair");
    if (!is_spd(lc.constraint.covariance))
      throw std::invalid_argument("loop closure covariance not positive definite");
    Edge e;
    e.i = lc.i;
    e.j = lc.j;
    e.meas = lc.constraint;
    out.lc_edges.push_back(e);
  }
  return out;
}

namespace {

nlohmann::json edge_to_json(const Edge& e) {
  nlohmann::json j;
  j["i"] = e.i;
  j["j"] = e.j;
  j["mean"] = {e.meas.dx, e.meas.dy, e.meas.dphi};
  std::vector<double> cov(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cov[r * 3 + c] = e.meas.covariance(r, c);
  j["cov"] = cov;
  return j;
}

Edge edge_from_json(const nlohmann::json& j) {
  Edge e;
  e.i = j.at("i").get<int>();
  e.j = j.at("j").get<int>();
  const auto mean = j.at("mean");
  e.meas.dx = mean.at(0).get<double>();
  e.meas.dy = mean.at(1).get<double>();
  e.meas.dphi = mean.at(2).get<double>();
  const auto cov = j.at("cov");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) e.meas.covariance(r, c) = cov.at(r * 3 + c).get<double>();
  return e;
}

}  // namespace

std::string graph_to_json(const PoseGraph& g) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& p : g.vertices) j["vertices"].push_back({p.x, p.y, p.phi});
  j["odom_edges"] = nlohmann::json::array();
  for (const auto& e : g.odom_edges) j["odom_edges"].push_back(edge_to_json(e));
  j["lc_edges"] = nlohmann::json::array();
  for (const auto& e : g.lc_edges) j["lc_edges"].push_back(edge_to_json(e));
  return j.dump(2);
}

PoseGraph graph_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PoseGraph g;
  for (const auto& v : j.at("vertices"))
    g.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
  for (const auto& e : j.at("odom_edges")) g.odom_edges.push_back(edge_from_json(e));
  for (const auto& e : j.at("lc_edges")) g.lc_edges.push_back(edge_from_json(e));
  return g;
}

}  // namespace bmap
