#include "boundarymap/gmm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bmap {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;

double log_gauss(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double gmm_nll(const GmmModel& model, const std::vector<double>& data) {
  if (data.empty()) return 0.0;
  double nll = 0.0;
  std::vector<double> terms(model.weights.size());
  for (double x : data) {
    for (size_t k = 0; k < model.weights.size(); ++k)
      terms[k] = std::log(model.weights[k]) + log_gauss(x, model.means[k], model.variances[k]);
    nll -= log_sum_exp(terms);
  }
  return nll;
}

GmmModel em_fit(const std::vector<double>& data, int K, std::uint64_t seed,
                const GmmFitConfig& cfg) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (static_cast<int>(data.size()) < K)
    throw std::invalid_argument("fewer data points than components");
  const size_t n = data.size();

  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var = std::max(var / static_cast<double>(n), cfg.variance_floor);

  if (K == 1) {
    GmmModel m;
    m.weights = {1.0};
    m.means = {mean};
    m.variances = {var};
    m.nll = gmm_nll(m, data);
    return m;
  }

  std::mt19937_64 rng(seed);
  GmmModel best;
  best.nll = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    GmmModel m;
    m.weights.assign(static_cast<size_t>(K), 1.0 / K);
    // Start with cluster-scale spread, not the global variance; components
    // initialised that wide share responsibility for everything and collapse
    // onto the global mean in the first M step.
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double span = (*hi - *lo) / static_cast<double>(2 * K);
    const double init_var = std::max(span * span, cfg.variance_floor);
    m.variances.assign(static_cast<size_t>(K), init_var);
    m.means.resize(static_cast<size_t>(K));
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    // D^2 seeding: spread the initial means across the clusters instead of
    // letting two land in the same tight cluster.
    m.means[0] = data[pick(rng)];
    std::vector<double> d2(n);
    for (int k = 1; k < K; ++k) {
      double total = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int q = 0; q < k; ++q)
          nearest = std::min(nearest, std::abs(data[i] - m.means[static_cast<size_t>(q)]));
        d2[i] = nearest * nearest;
        total += d2[i];
      }
      if (total <= 0.0) {
        m.means[static_cast<size_t>(k)] = data[pick(rng)];
        continue;
      }
      std::uniform_real_distribution<double> unif(0.0, total);
      double r = unif(rng);
      size_t chosen = n - 1;
      for (size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0) { chosen = i; break; }
      }
      m.means[static_cast<size_t>(k)] = data[chosen];
    }

    std::vector<std::vector<double>> resp(static_cast<size_t>(K),
                                          std::vector<double>(n));
    double prev_nll = std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<size_t>(K));
    for (int it = 0; it < cfg.max_em_iters; ++it) {
      // E step
      double nll = 0.0;
      for (size_t i = 0; i < n; ++i) {
        for (int k = 0; k < K; ++k)
          terms[static_cast<size_t>(k)] =
              std::log(m.weights[static_cast<size_t>(k)]) +
              log_gauss(data[i], m.means[static_cast<size_t>(k)],
                        m.variances[static_cast<size_t>(k)]);
        const double lse = log_sum_exp(terms);
        nll -= lse;
        for (int k = 0; k < K; ++k)
          resp[static_cast<size_t>(k)][i] = std::exp(terms[static_cast<size_t>(k)] - lse);
      }
      // M step
      for (int k = 0; k < K; ++k) {
        auto& rk = resp[static_cast<size_t>(k)];
        const double nk = std::accumulate(rk.begin(), rk.end(), 0.0);
        if (nk < 1e-10) {
          // dead component: re-seed it on a random data point
          m.means[static_cast<size_t>(k)] = data[pick(rng)];
          m.variances[static_cast<size_t>(k)] = var;
          m.weights[static_cast<size_t>(k)] = 1.0 / n;
          continue;
        }
        double mu = 0.0;
        for (size_t i = 0; i < n; ++i) mu += rk[i] * data[i];
        mu /= nk;
        double v = 0.0;
        for (size_t i = 0; i < n; ++i) v += rk[i] * (data[i] - mu) * (data[i] - mu);
        v = std::max(v / nk, cfg.variance_floor);
        m.means[static_cast<size_t>(k)] = mu;
        m.variances[static_cast<size_t>(k)] = v;
        m.weights[static_cast<size_t>(k)] = nk / static_cast<double>(n);
      }
      const double wsum =
          std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
      for (auto& w : m.weights) w /= wsum;

      if (prev_nll - nll < cfg.em_tol && it > 0) {
        prev_nll = nll;
        break;
      }
      prev_nll = nll;
    }
    m.nll = gmm_nll(m, data);
    if (m.nll < best.nll) best = m;
  }
  return best;
}

GmmModel select_model(const std::vector<double>& data, std::uint64_t seed,
                      const GmmFitConfig& cfg, std::vector<double>* nll_history) {
  if (data.empty()) throw std::invalid_argument("select_model needs data");
  // BIC-penalised NLL; a K-component model has 3K - 1 free parameters. The
  // raw NLL keeps improving forever once EM is good at placing spike
  // components on single points, so it cannot drive the stopping rule.
  const double logn = std::log(static_cast<double>(data.size()));
  const auto score = [logn](const GmmModel& m) {
    return m.nll + 0.5 * (3.0 * m.components() - 1.0) * logn;
  };

  GmmModel best = em_fit(data, 1, seed, cfg);
  if (nll_history) nll_history->push_back(best.nll);
  int stale = 0;
  for (int K = 2; K <= cfg.K_max && K <= static_cast<int>(data.size()); ++K) {
    GmmModel cand = em_fit(data, K, seed + static_cast<std::uint64_t>(K), cfg);
    if (nll_history) nll_history->push_back(cand.nll);
    const double improvement = score(best) - score(cand);
    if (improvement >= cfg.rel_tol * std::max(1.0, std::abs(score(best)))) {
      best = cand;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return best;
}

double estimate_circumference(const GmmModel& model, double weight_floor) {
  std::vector<std::pair<double, double>> kept;  // (mean, weight)
  for (size_t k = 0; k < model.weights.size(); ++k)
    if (model.weights[k] >= weight_floor && model.means[k] > 0.0)
      kept.emplace_back(model.means[k], model.weights[k]);
  if (kept.empty()) throw std::runtime_error("no mixture component above weight floor");

  const double mu_min =
      std::min_element(kept.begin(), kept.end())->first;
  double num = 0.0, den = 0.0;
  for (const auto& [mu, w] : kept) {
    const double nk = std::max(1.0, std::round(mu / mu_min));
    num += nk * mu * w;
    den += nk * nk * w;
  }
  return num / den;
}

std::string gmm_to_json(const GmmModel& model) {
  nlohmann::json j;
  j["K"] = model.components();
  j["weights"] = model.weights;
  j["means"] = model.means;
  j["variances"] = model.variances;
  j["nll"] = model.nll;
  return j.dump(2);
}

}  // namespace bmap
