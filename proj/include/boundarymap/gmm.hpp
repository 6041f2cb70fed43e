#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bmap {

// 1-D Gaussian mixture: weights sum to one, variances floored.
struct GmmModel {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  double nll = 0.0;  // negative log likelihood on the training data

  int components() const { return static_cast<int>(weights.size()); }
};

struct GmmFitConfig {
  double variance_floor = 1e-4;
  int restarts = 10;
  int max_em_iters = 200;
  double em_tol = 1e-8;   // absolute NLL improvement per EM step
  int K_max = 16;
  double rel_tol = 1e-3;  // relative NLL improvement across K
  int patience = 3;       // consecutive non-improving K before the scan stops
};

// Negative log likelihood of the data under the model. Empty data -> 0.
double gmm_nll(const GmmModel& model, const std::vector<double>& data);

// EM fit with K components, best of `restarts` seeded random restarts.
GmmModel em_fit(const std::vector<double>& data, int K, std::uint64_t seed,
                const GmmFitConfig& cfg = GmmFitConfig{});

// Fits K = 1, 2, ... and returns the last model whose BIC-penalised NLL
// improved on the previous best by at least rel_tol. The scan ends after
// `patience` consecutive non-improving K, so one bad EM run does not end it.
GmmModel select_model(const std::vector<double>& data, std::uint64_t seed,
                      const GmmFitConfig& cfg = GmmFitConfig{},
                      std::vector<double>* nll_history = nullptr);

// Circumference from a mixture over loop-closure path distances: components
// above the weight floor are assumed to sit at integer multiples of the
// smallest kept mean, and U is the weighted least-squares fit over those
// multiples.
double estimate_circumference(const GmmModel& model, double weight_floor = 0.05);

std::string gmm_to_json(const GmmModel& model);

}  // namespace bmap
