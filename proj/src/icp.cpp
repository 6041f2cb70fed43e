#include "boundarymap/icp.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace bmap {

namespace {
// Half-width of the cloud used for constraint alignment, meters.
constexpr double kMaxCloudRadius = 2.0;
}  // namespace

NeighborhoodCloud extract_cloud(const std::vector<Pose>& path,
                                const OrientationProfile& profile, int center_index,
                                double L_NH, double spacing) {
  if (spacing <= 0.0) throw std::invalid_argument("spacing must be positive");
  const auto& l = profile.breakpoints;
  if (center_index < 0 || center_index >= static_cast<int>(l.size()))
    throw std::out_of_range("center index outside profile");
  const double lc = l[static_cast<size_t>(center_index)];
  if (lc - L_NH < 0.0 || lc + L_NH > profile.total_length())
    throw std::invalid_argument("neighborhood truncated by path ends");

  // Breakpoint indices must line up with path indices; a profile that
  // dropped zero-length segments cannot be used here.
  if (l.size() != path.size())
    throw std::invalid_argument("profile does not match path");

  const Pose& center = path[static_cast<size_t>(center_index)];
  const double c = std::cos(center.phi), s = std::sin(center.phi);

  NeighborhoodCloud cloud;
  const int half = static_cast<int>(std::floor(L_NH / spacing));
  cloud.points.reserve(static_cast<size_t>(2 * half + 1));
  for (int k = -half; k <= half; ++k) {
    const double x = lc + static_cast<double>(k) * spacing;
    // interpolate position at arc length x
    const auto it = std::upper_bound(l.begin(), l.end(), x);
    size_t hi = std::min(static_cast<size_t>(it - l.begin()), l.size() - 1);
    if (hi == 0) hi = 1;
    const size_t lo = hi - 1;
    const double span = l[hi] - l[lo];
    const double w = (span > 0.0) ? (x - l[lo]) / span : 0.0;
    const Eigen::Vector2d p =
        (1.0 - w) * path[lo].position() + w * path[hi].position();
    const Eigen::Vector2d d = p - center.position();
    cloud.points.emplace_back(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
  }
  return cloud;
}

IcpResult icp(const NeighborhoodCloud& a, const NeighborhoodCloud& b, int max_iters,
              double tol) {
  if (a.points.empty() || b.points.empty())
    throw std::invalid_argument("icp needs nonempty clouds");

  IcpResult res;
  double beta = 0.0;
  Eigen::Vector2d t = Eigen::Vector2d::Zero();
  double prev_mean = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter + 1;
    const double c = std::cos(beta), s = std::sin(beta);

    // nearest-neighbor correspondences for the transformed source
    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> pairs;
    pairs.reserve(a.points.size());
    std::vector<double> dists;
    dists.reserve(a.points.size());
    double mean_dist = 0.0;
    for (const auto& pa : a.points) {
      const Eigen::Vector2d q(c * pa.x() - s * pa.y() + t.x(),
                              s * pa.x() + c * pa.y() + t.y());
      double best = std::numeric_limits<double>::infinity();
      Eigen::Vector2d best_pt = b.points.front();
      for (const auto& pb : b.points) {
        const double d2 = (pb - q).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_pt = pb;
        }
      }
      const double d = std::sqrt(best);
      pairs.emplace_back(pa, best_pt);
      dists.push_back(d);
      mean_dist += d;
    }
    mean_dist /= static_cast<double>(a.points.size());
    res.residual = mean_dist;

    if (std::abs(prev_mean - mean_dist) < tol) {
      res.converged = true;
      break;
    }
    prev_mean = mean_dist;

    // distance cap against gross outliers
    const double cap = 3.0 * std::max(mean_dist, 1e-12);
    Eigen::Vector2d ca = Eigen::Vector2d::Zero(), cb = Eigen::Vector2d::Zero();
    int kept = 0;
    for (size_t k = 0; k < pairs.size(); ++k) {
      if (dists[k] > cap) continue;
      ca += pairs[k].first;
      cb += pairs[k].second;
      ++kept;
    }
    if (kept == 0) break;
    ca /= kept;
    cb /= kept;

    // closed-form 2-D rigid fit (Procrustes)
    double sxx = 0.0, sxy = 0.0, syx = 0.0, syy = 0.0;
    for (size_t k = 0; k < pairs.size(); ++k) {
      if (dists[k] > cap) continue;
      const Eigen::Vector2d u = pairs[k].first - ca;
      const Eigen::Vector2d v = pairs[k].second - cb;
      sxx += u.x() * v.x();
      sxy += u.x() * v.y();
      syx += u.y() * v.x();
      syy += u.y() * v.y();
    }
    beta = std::atan2(sxy - syx, sxx + syy);
    const double nc = std::cos(beta), ns = std::sin(beta);
    t = cb - Eigen::Vector2d(nc * ca.x() - ns * ca.y(), ns * ca.x() + nc * ca.y());
  }
  res.beta = wrap_angle(beta);
  res.t = t;
  return res;
}

RelativeMeasurement closure_constraint(double beta, const Eigen::Vector2d& t, double c_ij,
                                       double gamma1, double gamma2) {
  if (gamma1 <= 0.0 || gamma2 <= 0.0)
    throw std::invalid_argument("gamma parameters must be positive");
  const double c = std::max(c_ij, 1e-6);
  RelativeMeasurement m;
  m.dx = t.x();
  m.dy = t.y();
  m.dphi = wrap_angle(beta);
  m.covariance = Eigen::Matrix3d::Zero();
  m.covariance(0, 0) = gamma1 * c;
  m.covariance(1, 1) = gamma1 * c;
  m.covariance(2, 2) = gamma2 * c;
  return m;
}

void fill_closure_constraints(std::vector<LoopClosure>& closures,
                              const std::vector<Pose>& path,
                              const OrientationProfile& profile, double L_NH,
                              double gamma1, double gamma2, const IcpConfig& icp_cfg,
                              bool original_mode) {
  for (auto& lc : closures) {
    if (original_mode) {
      lc.constraint = closure_constraint(0.0, Eigen::Vector2d::Zero(), lc.c_ij, gamma1, gamma2);
      continue;
    }
    // Clouds wider than a few meters bend with odometry drift, and the rigid
    // ICP fit then absorbs the bend as a pose error; detection needs the full
    // L_NH window but alignment is best on a short one.
    const double radius = std::min(L_NH, kMaxCloudRadius);
    const NeighborhoodCloud cloud_i =
        extract_cloud(path, profile, lc.i, radius, icp_cfg.spacing);
    const NeighborhoodCloud cloud_j =
        extract_cloud(path, profile, lc.j, radius, icp_cfg.spacing);
    // Aligning the j-neighborhood onto the i-neighborhood recovers p_j (-) p_i.
    const IcpResult fit = icp(cloud_j, cloud_i, icp_cfg.max_iters, icp_cfg.tol);
    lc.constraint = closure_constraint(fit.beta, fit.t, lc.c_ij, gamma1, gamma2);
  }
}

}  // namespace bmap
