#include "boundarymap/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bmap {

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.141592653589793);
}

double sq(double x) { return x * x; }

double kernel(const std::vector<double>& a, const std::vector<double>& b,
              const std::vector<double>& ls, double signal_var) {
  double d2 = 0.0;
  for (size_t k = 0; k < a.size(); ++k) d2 += sq((a[k] - b[k]) / ls[k]);
  return signal_var * std::exp(-0.5 * d2);
}

// Cholesky of a dense SPD matrix stored row-major; returns false on failure.
bool cholesky(std::vector<std::vector<double>>& m) {
  const size_t n = m.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double s = m[i][j];
      for (size_t k = 0; k < j; ++k) s -= m[i][k] * m[j][k];
      if (i == j) {
        if (s <= 0.0) return false;
        m[i][i] = std::sqrt(s);
      } else {
        m[i][j] = s / m[j][j];
      }
    }
    for (size_t j = i + 1; j < n; ++j) m[i][j] = 0.0;
  }
  return true;
}

std::vector<double> chol_solve(const std::vector<std::vector<double>>& L,
                               std::vector<double> b) {
  const size_t n = L.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < i; ++k) b[i] -= L[i][k] * b[k];
    b[i] /= L[i][i];
  }
  for (size_t i = n; i-- > 0;) {
    for (size_t k = i + 1; k < n; ++k) b[i] -= L[k][i] * b[k];
    b[i] /= L[i][i];
  }
  return b;
}

struct GpHypers {
  std::vector<double> ls;
  double signal_var = 1.0;
  double noise_var = 1e-4;
};

// Negative log marginal likelihood of standardized targets.
double neg_lml(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
               const GpHypers& h) {
  const size_t n = X.size();
  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j <= i; ++j)
      K[i][j] = K[j][i] = kernel(X[i], X[j], h.ls, h.signal_var) +
                          (i == j ? h.noise_var : 0.0);
  if (!cholesky(K)) return std::numeric_limits<double>::infinity();
  const auto alpha = chol_solve(K, y);
  double lml = 0.0;
  for (size_t i = 0; i < n; ++i) lml -= 0.5 * y[i] * alpha[i];
  for (size_t i = 0; i < n; ++i) lml -= std::log(K[i][i]);
  return -lml;
}

}  // namespace

void Gp::fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  if (X.empty() || X.size() != y.size()) throw std::invalid_argument("bad GP training set");
  X_ = X;
  const size_t n = y.size();
  const size_t d = X[0].size();

  y_mean_ = 0.0;
  for (double v : y) y_mean_ += v;
  y_mean_ /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += sq(v - y_mean_);
  y_std_ = std::sqrt(var / static_cast<double>(n));
  if (y_std_ < 1e-12) y_std_ = 1.0;
  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) ys[i] = (y[i] - y_mean_) / y_std_;

  // marginal-likelihood fit via compass search over log hyperparameters
  GpHypers h;
  h.ls.assign(d, 0.5);
  h.signal_var = 1.0;
  h.noise_var = 1e-4;
  const size_t np = d + 2;
  auto get = [&](size_t k) -> double& {
    if (k < d) return h.ls[k];
    return k == d ? h.signal_var : h.noise_var;
  };
  auto clamp_param = [&](size_t k, double v) {
    if (k < d) return std::clamp(v, 0.03, 5.0);
    if (k == d) return std::clamp(v, 0.05, 20.0);
    return std::clamp(v, 1e-6, 1.0);
  };
  double best = neg_lml(X_, ys, h);
  double step = 2.0;
  for (int round = 0; round < 12 && step > 1.05; ++round) {
    bool improved = false;
    for (size_t k = 0; k < np; ++k) {
      const double orig = get(k);
      for (double factor : {step, 1.0 / step}) {
        get(k) = clamp_param(k, orig * factor);
        const double v = neg_lml(X_, ys, h);
        if (v < best) {
          best = v;
          improved = true;
          break;
        }
        get(k) = orig;
      }
    }
    if (!improved) step = std::sqrt(step);
  }
  length_scales_ = h.ls;
  signal_var_ = h.signal_var;
  noise_var_ = h.noise_var;

  chol_.assign(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j <= i; ++j)
      chol_[i][j] = chol_[j][i] = kernel(X_[i], X_[j], length_scales_, signal_var_) +
                                  (i == j ? noise_var_ : 0.0);
  if (!cholesky(chol_)) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j <= i; ++j)
        chol_[i][j] = chol_[j][i] = kernel(X_[i], X_[j], length_scales_, signal_var_) +
                                    (i == j ? noise_var_ + 1e-6 : 0.0);
    if (!cholesky(chol_)) throw std::runtime_error("GP kernel matrix not PD");
  }
  alpha_ = chol_solve(chol_, ys);
}

Gp::Prediction Gp::predict(const std::vector<double>& x) const {
  const size_t n = X_.size();
  std::vector<double> k(n);
  for (size_t i = 0; i < n; ++i) k[i] = kernel(X_[i], x, length_scales_, signal_var_);
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += k[i] * alpha_[i];

  // var = k(x,x) - k^T K^{-1} k via forward substitution
  std::vector<double> v = k;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < i; ++j) v[i] -= chol_[i][j] * v[j];
    v[i] /= chol_[i][i];
  }
  double var = signal_var_;
  for (size_t i = 0; i < n; ++i) var -= sq(v[i]);
  var = std::max(var, 0.0);

  Prediction p;
  p.mean = mean * y_std_ + y_mean_;
  p.var = var * sq(y_std_);
  return p;
}

double expected_improvement(double mean, double var, double best) {
  if (var <= 0.0) return std::max(best - mean, 0.0);
  const double sd = std::sqrt(var);
  const double z = (best - mean) / sd;
  const double ei = (best - mean) * norm_cdf(z) + sd * norm_pdf(z);
  return std::max(ei, 0.0);
}

namespace {

std::vector<double> to_unit(const std::vector<double>& theta, const SearchSpace& space) {
  std::vector<double> u(theta.size());
  for (size_t k = 0; k < theta.size(); ++k) {
    const auto& d = space.dims[k];
    if (d.log_scale)
      u[k] = (std::log(theta[k]) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo));
    else
      u[k] = (theta[k] - d.lo) / (d.hi - d.lo);
  }
  return u;
}

std::vector<double> from_unit(const std::vector<double>& u, const SearchSpace& space) {
  std::vector<double> theta(u.size());
  for (size_t k = 0; k < u.size(); ++k) {
    const auto& d = space.dims[k];
    const double c = std::clamp(u[k], 0.0, 1.0);
    if (d.log_scale)
      theta[k] = std::exp(std::log(d.lo) + c * (std::log(d.hi) - std::log(d.lo)));
    else
      theta[k] = d.lo + c * (d.hi - d.lo);
  }
  return theta;
}

}  // namespace

BoResult bo_minimize(const std::function<double(const std::vector<double>&)>& cost,
                     const SearchSpace& space, int budget, std::uint64_t seed,
                     int initial_design) {
  const size_t d = space.dims.size();
  for (const auto& dim : space.dims)
    if (!(dim.lo < dim.hi)) throw std::invalid_argument("search space bounds inverted");
  if (budget < initial_design) throw std::invalid_argument("budget below initial design size");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<double>> X;   // unit-box points
  std::vector<double> costs_raw;        // as returned (penalties substituted)
  double worst_finite = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](const std::vector<double>& u) {
    const auto theta = from_unit(u, space);
    double c;
    try {
      c = cost(theta);
    } catch (const std::exception&) {
      c = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(c)) {
      // 10x the worst finite cost seen so far, pushed upward so it stays a
      // penalty even when costs are negative.
      c = std::isfinite(worst_finite)
              ? (worst_finite > 0.0
                     ? 10.0 * worst_finite
                     : worst_finite + 9.0 * std::max(1.0, std::abs(worst_finite)))
              : 1e6;
    } else {
      worst_finite = std::max(worst_finite, c);
    }
    X.push_back(u);
    costs_raw.push_back(c);
    return c;
  };

  // Latin hypercube initial design
  std::vector<std::vector<size_t>> strata(d, std::vector<size_t>(static_cast<size_t>(initial_design)));
  for (size_t k = 0; k < d; ++k) {
    auto& s = strata[k];
    for (size_t i = 0; i < s.size(); ++i) s[i] = i;
    std::shuffle(s.begin(), s.end(), rng);
  }
  for (int i = 0; i < initial_design; ++i) {
    std::vector<double> u(d);
    for (size_t k = 0; k < d; ++k)
      u[k] = (static_cast<double>(strata[k][static_cast<size_t>(i)]) + unif(rng)) /
             static_cast<double>(initial_design);
    evaluate(u);
  }

  Gp gp;
  for (int iter = initial_design; iter < budget; ++iter) {
    gp.fit(X, costs_raw);
    const double best = *std::min_element(costs_raw.begin(), costs_raw.end());

    // acquisition: best of seeded random candidates, then compass refinement
    std::vector<double> best_u(d, 0.5);
    double best_ei = -1.0;
    for (int c = 0; c < 1000; ++c) {
      std::vector<double> u(d);
      for (auto& v : u) v = unif(rng);
      const auto p = gp.predict(u);
      const double ei = expected_improvement(p.mean, p.var, best);
      if (ei > best_ei) {
        best_ei = ei;
        best_u = u;
      }
    }
    double step = 0.05;
    while (step > 1e-3) {
      bool improved = false;
      for (size_t k = 0; k < d; ++k) {
        for (double dir : {step, -step}) {
          auto u = best_u;
          u[k] = std::clamp(u[k] + dir, 0.0, 1.0);
          const auto p = gp.predict(u);
          const double ei = expected_improvement(p.mean, p.var, best);
          if (ei > best_ei) {
            best_ei = ei;
            best_u = u;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    evaluate(best_u);
  }

  BoResult result;
  double inc = std::numeric_limits<double>::infinity();
  size_t inc_idx = 0;
  for (size_t i = 0; i < costs_raw.size(); ++i) {
    if (costs_raw[i] < inc) {
      inc = costs_raw[i];
      inc_idx = i;
    }
    BoTracePoint tp;
    tp.iter = static_cast<int>(i);
    tp.theta = from_unit(X[i], space);
    tp.cost = costs_raw[i];
    tp.incumbent = inc;
    result.trace.push_back(std::move(tp));
  }
  result.best_theta = from_unit(X[inc_idx], space);
  result.best_cost = inc;
  return result;
}

Stage1Eval stage1_evaluate(const std::vector<Pose>& path, const Stage1Params& params,
                           int m_eval, std::uint64_t seed) {
  Stage1Eval out;
  const OrientationProfile profile = build_profile(path);
  LoopClosureConfig lc_cfg;
  lc_cfg.L_NH = params.L_NH;
  lc_cfg.c_min = params.c_min;
  lc_cfg.phi_cycle = params.phi_cycle;
  lc_cfg.m_eval = m_eval;
  const ComparisonMatrix C = comparison_matrix(profile, lc_cfg);
  auto closures = detect_closures(C, profile, lc_cfg);
  std::erase_if(closures, [&](const LoopClosure& lc) {
    return !feasibility_check(lc, params.phi_cycle);
  });
  out.closures = closures;
  const int M = static_cast<int>(closures.size());
  if (M < kMinClosures) return out;

  std::vector<double> u, dphi;
  u.reserve(closures.size());
  dphi.reserve(closures.size());
  for (const auto& lc : closures) {
    u.push_back(lc.u_ij);
    dphi.push_back(lc.dphi_ij);
  }
  GmmFitConfig ucfg;
  out.gmm_u = select_model(u, seed, ucfg);
  GmmFitConfig pcfg;
  pcfg.variance_floor = 1e-4;  // rad^2
  out.gmm_phi = select_model(dphi, seed + 1, pcfg);
  out.cost = out.gmm_u.nll + out.gmm_phi.nll - std::log(static_cast<double>(M));
  out.U = estimate_circumference(out.gmm_u);
  out.valid = true;
  return out;
}

double stage1_cost(const std::vector<Pose>& path, const Stage1Params& params, int m_eval,
                   std::uint64_t seed) {
  const Stage1Eval e = stage1_evaluate(path, params, m_eval, seed);
  return e.valid ? e.cost : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> chain_distances(const std::vector<Pose>& vertices,
                                    const std::vector<LoopClosure>& closures) {
  std::vector<double> cum(vertices.size(), 0.0);
  for (size_t k = 1; k < vertices.size(); ++k)
    cum[k] = cum[k - 1] + (vertices[k].position() - vertices[k - 1].position()).norm();
  std::vector<double> u;
  u.reserve(closures.size());
  for (const auto& lc : closures)
    u.push_back(cum[static_cast<size_t>(lc.j)] - cum[static_cast<size_t>(lc.i)]);
  return u;
}

double stage2_cost(const Stage2Params& gamma, const std::vector<Pose>& path,
                   const std::vector<LoopClosure>& closures, double U_stage1,
                   const OdomNoiseParams& noise, const SolverConfig& solver_cfg,
                   std::uint64_t seed) {
  if (closures.size() < static_cast<size_t>(kMinClosures) || U_stage1 <= 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  std::vector<LoopClosure> with_gamma = closures;
  for (auto& lc : with_gamma)
    lc.constraint = closure_constraint(lc.constraint.dphi,
                                       {lc.constraint.dx, lc.constraint.dy}, lc.c_ij,
                                       gamma.gamma1, gamma.gamma2);
  PoseGraph g = add_loop_closures(build_graph(path, noise), with_gamma);
  SolveResult solved;
  try {
    solved = optimize(g, solver_cfg);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const auto u = chain_distances(solved.graph.vertices, closures);
  const GmmModel model = select_model(u, seed);
  const double U_hat = estimate_circumference(model);
  return std::abs(U_stage1 - U_hat);
}

LearnResult learn(const std::vector<Pose>& path, const LearnConfig& cfg) {
  LearnResult out;
  const OrientationProfile profile = build_profile(path);
  const double total = profile.total_length();

  // L_NH must stay well below a plausible lap: closures shorter than 2 L_NH
  // are suppressed, so an oversized neighbourhood can delete the one-lap
  // cluster entirely and silently inflate the circumference estimate.
  SearchSpace s1;
  s1.dims.push_back({"L_NH", 2.0, std::min(40.0, 0.07 * total), false});
  s1.dims.push_back({"c_min", 0.01, 1.5, false});
  s1.dims.push_back({"phi_cycle", 0.0, kPi, false});

  out.stage1_trace = bo_minimize(
      [&](const std::vector<double>& theta) {
        return stage1_cost(path, {theta[0], theta[1], theta[2]}, cfg.m_eval, cfg.seed);
      },
      s1, cfg.budget, cfg.seed);
  out.params.stage1 = {out.stage1_trace.best_theta[0], out.stage1_trace.best_theta[1],
                       out.stage1_trace.best_theta[2]};

  Stage1Eval incumbent =
      stage1_evaluate(path, out.params.stage1, cfg.m_eval, cfg.seed);
  if (!incumbent.valid)
    throw std::runtime_error("stage 1 found no usable loop closures");
  out.U = incumbent.U;
  out.short_dataset = total < 2.5 * incumbent.U;

  fill_closure_constraints(incumbent.closures, path, profile, out.params.stage1.L_NH,
                           1.0, 1.0, cfg.icp, /*original_mode=*/false);
  out.closures = incumbent.closures;

  SearchSpace s2;
  s2.dims.push_back({"gamma1", 1e-4, 10.0, true});
  s2.dims.push_back({"gamma2", 1e-4, 10.0, true});
  out.stage2_trace = bo_minimize(
      [&](const std::vector<double>& gamma) {
        return stage2_cost({gamma[0], gamma[1]}, path, out.closures, out.U, cfg.noise,
                           cfg.solver, cfg.seed);
      },
      s2, cfg.budget, cfg.seed + 1);
  out.params.stage2 = {out.stage2_trace.best_theta[0], out.stage2_trace.best_theta[1]};
  return out;
}

}  // namespace bmap
