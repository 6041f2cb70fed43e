#include "boundarymap/bayes_opt.hpp"
#include "boundarymap/maps.hpp"
#include "boundarymap/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace bmap;

TEST_CASE("expected_improvement properties") {
  // zero variance: EI is the plain improvement, clipped at zero
  CHECK(expected_improvement(1.0, 0.0, 2.0) == doctest::Approx(1.0));
  CHECK(expected_improvement(3.0, 0.0, 2.0) == 0.0);

  // at mean == best with unit variance, EI = 1/sqrt(2*pi)
  CHECK(expected_improvement(0.0, 1.0, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * kPi)));

  // nonnegative and monotone in the variance
  double prev = 0.0;
  for (double v = 0.0; v <= 4.0; v += 0.25) {
    const double ei = expected_improvement(1.0, v, 0.0);  // mean above best
    CHECK(ei >= prev - 1e-12);
    CHECK(ei >= 0.0);
    prev = ei;
  }
}

TEST_CASE("gp interpolates noise-free data") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int k = 0; k <= 10; ++k) {
    const double x = k / 10.0;
    X.push_back({x});
    y.push_back(std::sin(6.0 * x));
  }
  Gp gp;
  gp.fit(X, y);
  for (size_t k = 0; k < X.size(); ++k) {
    const auto p = gp.predict(X[k]);
    CHECK(p.mean == doctest::Approx(y[k]).epsilon(0.05));
    CHECK(p.var >= 0.0);
  }
  // in-between prediction is sensible; far outside the data the GP is much
  // less certain than at a training point
  const auto mid = gp.predict({0.55});
  CHECK(mid.mean == doctest::Approx(std::sin(6.0 * 0.55)).epsilon(0.2));
  const auto at = gp.predict(X[5]);
  const auto far = gp.predict({5.0});
  CHECK(far.var > at.var);
}

TEST_CASE("bo_minimize finds the minimum of a smooth quadratic") {
  SearchSpace space;
  space.dims = {{"a", -2.0, 4.0, false}, {"b", 0.0, 6.0, false}};
  auto cost = [](const std::vector<double>& t) {
    const double a = t[0] - 1.0, b = t[1] - 2.0;
    return a * a + 0.5 * b * b;
  };
  const auto res = bo_minimize(cost, space, 30, 12345);
  CHECK(res.best_cost < 0.05);
  CHECK(res.best_theta[0] == doctest::Approx(1.0).epsilon(0.2));
  CHECK(res.best_theta[1] == doctest::Approx(2.0).epsilon(0.2));

  // deterministic
  const auto res2 = bo_minimize(cost, space, 30, 12345);
  CHECK(res2.best_cost == res.best_cost);
  REQUIRE(res2.trace.size() == res.trace.size());
  CHECK(res2.trace.back().theta == res.trace.back().theta);

  // trace bookkeeping: incumbents non-increasing, best matches the trace
  double inc = std::numeric_limits<double>::infinity();
  for (const auto& pt : res.trace) {
    inc = std::min(inc, pt.cost);
    CHECK(pt.incumbent == doctest::Approx(inc));
    for (size_t d = 0; d < space.dims.size(); ++d) {
      CHECK(pt.theta[d] >= space.dims[d].lo - 1e-12);
      CHECK(pt.theta[d] <= space.dims[d].hi + 1e-12);
    }
  }
  CHECK(res.best_cost == doctest::Approx(inc));
}

TEST_CASE("bo_minimize survives non-finite costs") {
  SearchSpace space;
  space.dims = {{"x", 0.0, 1.0, false}};
  int bad = 0;
  auto cost = [&bad](const std::vector<double>& t) {
    if (t[0] < 0.3) {
      ++bad;
      return std::numeric_limits<double>::quiet_NaN();
    }
    return (t[0] - 0.6) * (t[0] - 0.6);
  };
  const auto res = bo_minimize(cost, space, 25, 7);
  CHECK(std::isfinite(res.best_cost));
  CHECK(res.best_theta[0] >= 0.3);
  CHECK(res.best_cost < 0.02);
  for (const auto& pt : res.trace) CHECK(std::isfinite(pt.cost));
}

TEST_CASE("log-scale dimension concentrates sampling") {
  SearchSpace space;
  space.dims = {{"g", 1e-4, 10.0, true}};
  auto cost = [](const std::vector<double>& t) {
    const double lg = std::log10(t[0]);
    return (lg + 2.0) * (lg + 2.0);  // optimum at 1e-2
  };
  const auto res = bo_minimize(cost, space, 30, 99);
  CHECK(res.best_theta[0] == doctest::Approx(1e-2).epsilon(0.8));
  CHECK(res.best_cost < 0.05);
}

TEST_CASE("stage1 pipeline cost on a simulated run") {
  SimConfig cfg;
  cfg.map = bundled_map("curved");
  cfg.duration = 600.0;  // ~3.4 laps at 0.3 m/s
  cfg.seed = 11;
  const auto traj = simulate(cfg);
  // thin the path to something like the reduced representation
  std::vector<Pose> path;
  for (size_t k = 0; k < traj.measured_poses.size(); k += 30)
    path.push_back(traj.measured_poses[k]);

  Stage1Params good{8.0, 1.0, kPi / 2};
  const auto eval = stage1_evaluate(path, good, 50, 0);
  CHECK(eval.valid);
  CHECK(static_cast<int>(eval.closures.size()) >= kMinClosures);
  CHECK(std::isfinite(eval.cost));
  CHECK(eval.U == doctest::Approx(52.0).epsilon(0.15));

  // impossible threshold -> no closures -> NaN cost
  Stage1Params bad{8.0, 1e-6, 0.0};
  CHECK(std::isnan(stage1_cost(path, bad, 50, 0)));

  // chain_distances measures along the chain
  std::vector<Pose> chain;
  for (int k = 0; k <= 10; ++k) chain.emplace_back(2.0 * k, 0.0, 0.0);
  LoopClosure lc;
  lc.i = 2;
  lc.j = 9;
  const auto d = chain_distances(chain, {lc});
  REQUIRE(d.size() == 1);
  CHECK(d[0] == doctest::Approx(14.0));
}
