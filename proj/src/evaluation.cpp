#include "boundarymap/evaluation.hpp"

#include <cmath>

namespace bmap {

std::pair<double, double> relative_error(const PoseGraph& estimated,
                                         const std::vector<Pose>& truth) {
  if (estimated.vertices.size() != truth.size())
    throw std::invalid_argument("vertex count mismatch between estimate and truth");
  double e_trans = 0.0, e_rot = 0.0;
  int count = 0;
  auto accumulate = [&](const Edge& e) {
    const auto& est = estimated.vertices;
    const RelativeMeasurement xi_est =
        compound_diff(est[static_cast<size_t>(e.i)], est[static_cast<size_t>(e.j)]);
    const RelativeMeasurement xi_true =
        compound_diff(truth[static_cast<size_t>(e.i)], truth[static_cast<size_t>(e.j)]);
    // discrepancy of the two relative transforms, treated as poses
    const RelativeMeasurement d = compound_diff(
        Pose(xi_true.dx, xi_true.dy, xi_true.dphi), Pose(xi_est.dx, xi_est.dy, xi_est.dphi));
    e_trans += d.dx * d.dx + d.dy * d.dy;
    e_rot += d.dphi * d.dphi;
    ++count;
  };
  for (const auto& e : estimated.odom_edges) accumulate(e);
  for (const auto& e : estimated.lc_edges) accumulate(e);
  if (count == 0) throw std::invalid_argument("graph has no edges");
  return {e_trans / count, e_rot / count};
}

namespace {

MapPolygon transform_polygon(const MapPolygon& p, double angle, const Eigen::Vector2d& t) {
  const double c = std::cos(angle), s = std::sin(angle);
  MapPolygon out;
  out.vertices.reserve(p.vertices.size());
  for (const auto& v : p.vertices)
    out.vertices.emplace_back(c * v.x() - s * v.y() + t.x(), s * v.x() + c * v.y() + t.y());
  return out;
}

double iou(const MapPolygon& a, const MapPolygon& b) {
  const double inter = polygon_intersection_area(a, b);
  const double uni = polygon_union_area(a, b);
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

double area_error(const MapPolygon& estimate, const MapPolygon& truth, bool align) {
  if (!align) return 1.0 - iou(estimate, truth);

  const Eigen::Vector2d c_est = polygon_centroid(estimate);
  const Eigen::Vector2d c_true = polygon_centroid(truth);

  // Rotate about the estimate centroid, then translate centroid onto the
  // truth centroid; score by exact polygon IoU.
  auto score = [&](double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const Eigen::Vector2d rc(c * c_est.x() - s * c_est.y(), s * c_est.x() + c * c_est.y());
    return iou(transform_polygon(estimate, angle, c_true - rc), truth);
  };

  double best_angle = 0.0, best = -1.0;
  for (int k = 0; k < 360; ++k) {
    const double a = -kPi + 2.0 * kPi * k / 360.0;
    const double v = score(a);
    if (v > best) {
      best = v;
      best_angle = a;
    }
  }
  // golden-section refinement around the coarse optimum
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = best_angle - 2.0 * kPi / 360.0, hi = best_angle + 2.0 * kPi / 360.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = score(x2);
    }
  }
  best = std::max({best, f1, f2});
  return 1.0 - best;
}

namespace {

bool segments_cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c, const Eigen::Vector2d& d, double& s) {
  const Eigen::Vector2d r = b - a, q = d - c;
  const double denom = r.x() * q.y() - r.y() * q.x();
  if (std::abs(denom) < 1e-15) return false;
  const Eigen::Vector2d ac = c - a;
  s = (ac.x() * q.y() - ac.y() * q.x()) / denom;
  const double t = (ac.x() * r.y() - ac.y() * r.x()) / denom;
  return s > 1e-9 && s < 1.0 - 1e-9 && t > 1e-9 && t < 1.0 - 1e-9;
}

double loop_area(const std::vector<Eigen::Vector2d>& v) {
  double a = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const auto& u = v[i];
    const auto& w = v[(i + 1) % v.size()];
    a += u.x() * w.y() - w.x() * u.y();
  }
  return 0.5 * std::abs(a);
}

}  // namespace

LapPolygon polygon_from_graph(const PoseGraph& g, const std::vector<LoopClosure>& closures,
                              double U_estimate) {
  if (closures.empty()) throw std::runtime_error("lap extraction needs loop closures");
  const auto u = chain_distances(g.vertices, closures);
  size_t best = 0;
  for (size_t k = 1; k < u.size(); ++k)
    if (std::abs(u[k] - U_estimate) < std::abs(u[best] - U_estimate)) best = k;

  std::vector<Eigen::Vector2d> verts;
  for (int v = closures[best].i; v < closures[best].j; ++v)
    verts.push_back(g.vertices[static_cast<size_t>(v)].position());
  if (verts.size() < 3) throw std::runtime_error("extracted lap too short");

  LapPolygon out;
  const double total_area = loop_area(verts);
  // excise small crossing loops so the polygon becomes simple
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 200) {
    changed = false;
    const size_t n = verts.size();
    for (size_t i = 0; i < n && !changed; ++i) {
      for (size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        double s;
        if (!segments_cross(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n], s))
          continue;
        std::vector<Eigen::Vector2d> inner(verts.begin() + static_cast<long>(i) + 1,
                                           verts.begin() + static_cast<long>(j) + 1);
        if (inner.size() >= verts.size() - 2) continue;
        if (loop_area(inner) > 0.01 * total_area) continue;
        verts.erase(verts.begin() + static_cast<long>(i) + 1,
                    verts.begin() + static_cast<long>(j) + 1);
        out.cleanup_triggered = true;
        changed = true;
        break;
      }
    }
  }
  out.polygon.vertices = std::move(verts);
  out.polygon = normalize_polygon(out.polygon);
  return out;
}

}  // namespace bmap
