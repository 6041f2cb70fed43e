#include "boundarymap/sim.hpp"

#include <cmath>
#include <random>

namespace bmap {

namespace {
// Largest rotation a platform performs within one sample interval; turns
// beyond this are spread over multiple control steps.
constexpr double kTurnStep = 0.05;
}  // namespace

Trajectory wall_follow(const SimConfig& cfg) {
  if (cfg.speed <= 0.0 || cfg.sample_rate <= 0.0 || cfg.duration <= 0.0)
    throw std::invalid_argument("speed, sample_rate and duration must be positive");
  const MapPolygon poly = normalize_polygon(cfg.map);
  const size_t nv = poly.vertices.size();

  std::vector<double> seg_len(nv);
  std::vector<double> seg_phi(nv);
  std::vector<double> cum(nv + 1, 0.0);
  for (size_t k = 0; k < nv; ++k) {
    const Eigen::Vector2d d = poly.vertices[(k + 1) % nv] - poly.vertices[k];
    seg_len[k] = d.norm();
    seg_phi[k] = std::atan2(d.y(), d.x());
    cum[k + 1] = cum[k] + seg_len[k];
  }
  const double circumference = cum[nv];
  if (circumference <= 0.0) throw std::invalid_argument("degenerate polygon");

  const double dt = 1.0 / cfg.sample_rate;
  const auto n_samples = static_cast<size_t>(std::floor(cfg.duration * cfg.sample_rate)) + 1;

  Trajectory traj;
  traj.timestamps.reserve(n_samples);
  traj.true_poses.reserve(n_samples);
  for (size_t n = 0; n < n_samples; ++n) {
    const double t = static_cast<double>(n) * dt;
    double s = std::fmod(cfg.speed * t, circumference);
    // locate the segment containing arc length s
    size_t k = static_cast<size_t>(
                   std::upper_bound(cum.begin() + 1, cum.end(), s) - (cum.begin() + 1));
    if (k >= nv) k = nv - 1;
    const double local = s - cum[k];
    const Eigen::Vector2d dir(std::cos(seg_phi[k]), std::sin(seg_phi[k]));
    const Eigen::Vector2d pos = poly.vertices[k] + local * dir;
    traj.timestamps.push_back(t);
    traj.true_poses.emplace_back(pos.x(), pos.y(), seg_phi[k]);
  }
  return traj;
}

std::vector<Pose> corrupt(const std::vector<Pose>& true_poses, const OdomNoiseParams& noise,
                          std::uint64_t seed) {
  if (true_poses.size() < 2) throw std::invalid_argument("corrupt needs >= 2 poses");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Pose> measured;
  measured.reserve(true_poses.size());
  measured.push_back(true_poses.front());
  for (size_t k = 0; k + 1 < true_poses.size(); ++k) {
    const RelativeMeasurement inc = compound_diff(true_poses[k], true_poses[k + 1]);
    const double delta_T = std::hypot(inc.dx, inc.dy);
    const double delta_R = inc.dphi;
    // Direction of the translation within the previous frame; the rotation
    // noise is applied before the translation (rotate-then-translate).
    const double bearing = (delta_T > 0.0) ? std::atan2(inc.dy, inc.dx) : 0.0;

    // Sampling noise follows the standard quadratic odometry model, so the
    // total variance over a stretch of path stays bounded as the sample rate
    // grows. The linear expressions are only used as edge weights.
    //
    // Sharp corners compress the whole turn into a single sample interval.  A
    // real platform executes the turn at a bounded rate over several control
    // steps, so the accumulated rotation variance grows linearly with the
    // turned angle instead of quadratically.  Model that by capping the
    // per-step rotation that enters the variance terms.
    const double delta_R2 = std::min(delta_R * delta_R, kTurnStep * std::abs(delta_R));
    const double var_T = noise.alpha3 * delta_T * delta_T + noise.alpha4 * delta_R2;
    const double var_R = noise.alpha1 * delta_R2 + noise.alpha2 * delta_T * delta_T;
    const double eps_T = (var_T > 0.0) ? std::sqrt(var_T) * gauss(rng) : 0.0;
    const double eps_R = (var_R > 0.0) ? std::sqrt(var_R) * gauss(rng) : 0.0;

    RelativeMeasurement noisy;
    const double dT = delta_T + eps_T;
    noisy.dx = dT * std::cos(bearing + eps_R);
    noisy.dy = dT * std::sin(bearing + eps_R);
    noisy.dphi = delta_R + eps_R;
    measured.push_back(compound_apply(measured.back(), noisy));
  }
  return measured;
}

Trajectory simulate(const SimConfig& cfg) {
  Trajectory traj = wall_follow(cfg);
  traj.measured_poses = corrupt(traj.true_poses, cfg.noise, cfg.seed);
  return traj;
}

}  // namespace bmap
