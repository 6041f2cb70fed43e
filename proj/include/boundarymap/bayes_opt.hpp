#pragma once

#include "boundarymap/gmm.hpp"
#include "boundarymap/icp.hpp"
#include "boundarymap/loop_closure.hpp"
#include "boundarymap/optimizer.hpp"

#include <functional>

namespace bmap {

struct SearchSpace {
  struct Dim {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
  };
  std::vector<Dim> dims;
};

// Gaussian-process surrogate on the unit box with a squared-exponential
// kernel; per-dimension length scales are fit by maximizing the marginal
// likelihood. Targets are standardized internally.
class Gp {
 public:
  void fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y);

  struct Prediction {
    double mean = 0.0;
    double var = 0.0;
  };
  Prediction predict(const std::vector<double>& x) const;
  double noise_variance() const { return noise_var_; }

 private:
  std::vector<std::vector<double>> X_;
  std::vector<double> alpha_;
  std::vector<std::vector<double>> chol_;  // lower Cholesky of K + noise
  std::vector<double> length_scales_;
  double signal_var_ = 1.0;
  double noise_var_ = 1e-4;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
};

// Expected improvement for minimization (nonnegative).
double expected_improvement(double mean, double var, double best);

struct BoTracePoint {
  int iter = 0;
  std::vector<double> theta;
  double cost = 0.0;
  double incumbent = 0.0;
};

struct BoResult {
  std::vector<double> best_theta;
  double best_cost = 0.0;
  std::vector<BoTracePoint> trace;
};

// Episodic BO with expected improvement: Latin-hypercube initial design then
// EI-maximizing acquisitions. Non-finite costs are recorded as a penalty of
// 10x the worst finite cost seen (1e6 before any). Deterministic given seed.
BoResult bo_minimize(const std::function<double(const std::vector<double>&)>& cost,
                     const SearchSpace& space, int budget, std::uint64_t seed,
                     int initial_design = 5);

struct Stage1Params {
  double L_NH = 20.0;
  double c_min = 1.0;
  double phi_cycle = 0.0;
};

struct Stage2Params {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
};

struct MetaParameters {
  Stage1Params stage1;
  Stage2Params stage2;
};

constexpr int kMinClosures = 3;

// One stage-1 evaluation: detection, feasibility filter and the two GMM fits.
struct Stage1Eval {
  std::vector<LoopClosure> closures;
  GmmModel gmm_u;
  GmmModel gmm_phi;
  double cost = std::numeric_limits<double>::quiet_NaN();
  double U = 0.0;
  bool valid = false;
};

Stage1Eval stage1_evaluate(const std::vector<Pose>& path, const Stage1Params& params,
                           int m_eval, std::uint64_t seed);

// Cost of Eq-style stage 1: NLL(u) + NLL(dphi) - log(M). NaN when fewer than
// kMinClosures closures survive.
double stage1_cost(const std::vector<Pose>& path, const Stage1Params& params, int m_eval,
                   std::uint64_t seed);

// Cost of stage 2: rebuild the closure covariances with gamma, optimize the
// graph, re-estimate the circumference along the optimized chain and return
// |U_stage1 - U_hat|. The closure set (index pairs and ICP means) is fixed.
double stage2_cost(const Stage2Params& gamma, const std::vector<Pose>& path,
                   const std::vector<LoopClosure>& closures, double U_stage1,
                   const OdomNoiseParams& noise, const SolverConfig& solver_cfg,
                   std::uint64_t seed);

struct LearnConfig {
  int budget = 30;
  int m_eval = 50;
  IcpConfig icp;
  SolverConfig solver;
  OdomNoiseParams noise;
  std::uint64_t seed = 0;
};

struct LearnResult {
  MetaParameters params;
  double U = 0.0;
  std::vector<LoopClosure> closures;  // at the stage-1 incumbent, ICP-filled
  BoResult stage1_trace;
  BoResult stage2_trace;
  bool short_dataset = false;  // fewer than ~2 laps of data
};

// Two-stage meta-parameter learning on a measured (reduced) path.
LearnResult learn(const std::vector<Pose>& path, const LearnConfig& cfg);

// Path distances for the closure pairs measured along an arbitrary vertex
// chain (used on optimized graphs).
std::vector<double> chain_distances(const std::vector<Pose>& vertices,
                                    const std::vector<LoopClosure>& closures);

}  // namespace bmap
