#include "boundarymap/loop_closure.hpp"

#include <algorithm>
#include <cmath>

namespace bmap {

double OrientationProfile::theta(double x) const {
  // theta(x) = phi_i for l_{i-1} <= x < l_i; clamped at the path ends.
  if (x < breakpoints.front()) return values.front();
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  if (it == breakpoints.end()) return values.back();
  return values[static_cast<size_t>(it - breakpoints.begin())];
}

OrientationProfile build_profile(const std::vector<Pose>& path) {
  if (path.size() < 2) throw std::invalid_argument("build_profile needs >= 2 poses");
  OrientationProfile prof;
  prof.breakpoints.push_back(0.0);
  prof.values.push_back(path.front().phi);
  for (size_t k = 1; k < path.size(); ++k) {
    const double step = (path[k].position() - path[k - 1].position()).norm();
    if (step <= 0.0) {
      ++prof.dropped_segments;
      continue;
    }
    const double dphi = wrap_angle(path[k].phi -
                                   wrap_angle(prof.values.back()));
    prof.breakpoints.push_back(prof.breakpoints.back() + step);
    prof.values.push_back(prof.values.back() + dphi);
  }
  if (prof.breakpoints.size() < 2)
    throw std::invalid_argument("path collapsed to a single point");
  return prof;
}

ComparisonMatrix comparison_matrix(const OrientationProfile& profile,
                                   const LoopClosureConfig& cfg) {
  if (cfg.L_NH <= 0.0 || cfg.m_eval < 2)
    throw std::invalid_argument("invalid loop closure config");
  const int n = static_cast<int>(profile.breakpoints.size());
  const double total = profile.total_length();

  ComparisonMatrix out;
  out.values = Eigen::MatrixXf::Constant(n, n, std::numeric_limits<float>::quiet_NaN());
  int first = n, last = -1;
  for (int i = 0; i < n; ++i) {
    const double l = profile.breakpoints[static_cast<size_t>(i)];
    if (l - cfg.L_NH >= 0.0 && l + cfg.L_NH <= total) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  if (last < first) {
    out.all_invalid = true;
    out.first_valid = 0;
    out.last_valid = -1;
    return out;
  }
  out.all_invalid = false;
  out.first_valid = first;
  out.last_valid = last;

  // Precompute the baseline-shifted neighborhood samples per valid vertex.
  const int m = cfg.m_eval;
  const int nv = last - first + 1;
  Eigen::MatrixXf samples(nv, m);
  for (int i = first; i <= last; ++i) {
    const double l = profile.breakpoints[static_cast<size_t>(i)];
    const double phi = profile.values[static_cast<size_t>(i)];
    for (int k = 0; k < m; ++k) {
      const double x = -cfg.L_NH + 2.0 * cfg.L_NH * static_cast<double>(k) /
                                       static_cast<double>(m - 1);
      samples(i - first, k) = static_cast<float>(profile.theta(l + x) - phi);
    }
  }

  const float inv_m = 1.0f / static_cast<float>(m);
  for (int i = first; i <= last; ++i) {
    out.values(i, i) = 0.0f;
    for (int j = i + 1; j <= last; ++j) {
      const float c =
          (samples.row(i - first) - samples.row(j - first)).cwiseAbs().sum() * inv_m;
      out.values(i, j) = c;
      out.values(j, i) = c;
    }
  }
  return out;
}

std::vector<LoopClosure> detect_closures(const ComparisonMatrix& C,
                                         const OrientationProfile& profile,
                                         const LoopClosureConfig& cfg) {
  std::vector<LoopClosure> result;
  if (C.all_invalid || cfg.c_min <= 0.0) return result;
  const auto& l = profile.breakpoints;
  const auto& phi = profile.values;
  const int first = C.first_valid, last = C.last_valid;

  // Candidates: strict 8-neighbor local minima below c_min, far enough from
  // the diagonal that they cannot be self-matches.
  struct Cand {
    float c;
    int i, j;
  };
  std::vector<Cand> cands;
  for (int i = first; i <= last; ++i) {
    for (int j = i + 1; j <= last; ++j) {
      const float c = C.values(i, j);
      if (!(c < static_cast<float>(cfg.c_min))) continue;
      if (l[static_cast<size_t>(j)] - l[static_cast<size_t>(i)] < 2.0 * cfg.L_NH) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int a = i + di, b = j + dj;
          if (a < first || a > last || b < first || b > last) continue;
          const float nb = C.values(a, b);
          if (std::isnan(nb)) continue;
          if (nb < c || (nb == c && (di < 0 || (di == 0 && dj < 0)))) {
            is_min = false;
            break;
          }
        }
      }
      if (is_min) cands.push_back({c, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.c != b.c) return a.c < b.c;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  // Non-minimum suppression: one closure per window of radius L_NH along
  // both path-length axes.
  std::vector<std::pair<double, double>> accepted;
  for (const auto& cand : cands) {
    const double li = l[static_cast<size_t>(cand.i)];
    const double lj = l[static_cast<size_t>(cand.j)];
    bool suppressed = false;
    for (const auto& [ai, aj] : accepted) {
      if (std::abs(ai - li) <= cfg.L_NH && std::abs(aj - lj) <= cfg.L_NH) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    accepted.emplace_back(li, lj);
    LoopClosure lc;
    lc.i = cand.i;
    lc.j = cand.j;
    lc.c_ij = static_cast<double>(cand.c);
    lc.u_ij = lj - li;
    lc.dphi_ij = phi[static_cast<size_t>(cand.j)] - phi[static_cast<size_t>(cand.i)];
    result.push_back(lc);
  }
  std::sort(result.begin(), result.end(), [](const LoopClosure& a, const LoopClosure& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return result;
}

bool feasibility_check(const LoopClosure& closure, double phi_cycle) {
  double r = std::fmod(closure.dphi_ij, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  // Non-strict comparison so that phi_cycle = 0 accepts everything,
  // including exact symmetric aliases.
  return std::abs(kPi - r) >= phi_cycle;
}

}  // namespace bmap
