#include "boundarymap/pose_graph.hpp"

#include <doctest.h>

using namespace bmap;

TEST_CASE("odom_covariance structure") {
  const OdomNoiseParams a;  // 0.0849, 0.0412, 0.0316, 0.0173
  const double dT = 1.0, dR = 0.5;

  SUBCASE("phi = 0") {
    const auto S = odom_covariance(Pose(0, 0, 0), dT, dR, a);
    CHECK(S(0, 0) == doctest::Approx(a.alpha3 * dT + a.alpha4 * dR));
    CHECK(S(1, 1) == doctest::Approx(kCovarianceFloor));  // sin 0 = 0, floored
    CHECK(S(2, 2) == doctest::Approx(a.alpha1 * dR + a.alpha2 * dT));
    CHECK(S(0, 1) == 0.0);
    CHECK(S(1, 2) == 0.0);
    CHECK(is_spd(S));
  }

  SUBCASE("phi = pi/2: roles of x/y swap") {
    const auto S = odom_covariance(Pose(0, 0, kPi / 2), dT, dR, a);
    CHECK(S(0, 0) == doctest::Approx(kCovarianceFloor).epsilon(1.0));
    CHECK(S(1, 1) == doctest::Approx(a.alpha3 * dT + a.alpha4 * dR));
    CHECK(is_spd(S));
  }

  SUBCASE("negative heading stays PD") {
    const auto S = odom_covariance(Pose(0, 0, -2.5), dT, dR, a);
    CHECK(S(0, 0) > 0.0);
    CHECK(S(1, 1) > 0.0);
    CHECK(S(2, 2) > 0.0);
    CHECK(is_spd(S));
  }

  SUBCASE("zero motion floors every entry") {
    const auto S = odom_covariance(Pose(0, 0, 0.3), 0.0, 0.0, a);
    CHECK(S(0, 0) >= kCovarianceFloor);
    CHECK(S(1, 1) >= kCovarianceFloor);
    CHECK(S(2, 2) >= kCovarianceFloor);
    CHECK(is_spd(S));
  }
}

TEST_CASE("build_graph chains consecutive edges") {
  std::vector<Pose> path = {Pose(0, 0, 0), Pose(1, 0, 0), Pose(2, 0, kPi / 2),
                            Pose(2, 1, kPi / 2)};
  const auto g = build_graph(path);
  REQUIRE(g.vertices.size() == 4);
  REQUIRE(g.odom_edges.size() == 3);
  CHECK(g.lc_edges.empty());
  for (size_t k = 0; k < g.odom_edges.size(); ++k) {
    const auto& e = g.odom_edges[k];
    CHECK(e.i == static_cast<int>(k));
    CHECK(e.j == static_cast<int>(k) + 1);
    const auto d = compound_diff(path[e.i], path[e.j]);
    CHECK(e.meas.dx == doctest::Approx(d.dx));
    CHECK(e.meas.dy == doctest::Approx(d.dy));
    CHECK(e.meas.dphi == doctest::Approx(d.dphi));
    CHECK(is_spd(e.meas.covariance));
  }
  // last step: pure translation along +y with heading pi/2
  CHECK(g.odom_edges[2].meas.dx == doctest::Approx(1.0));
  CHECK(g.odom_edges[2].meas.dy == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("add_loop_closures validation") {
  std::vector<Pose> path;
  for (int k = 0; k < 10; ++k) path.emplace_back(k, 0.0, 0.0);
  const auto g = build_graph(path);

  LoopClosure lc;
  lc.i = 1;
  lc.j = 7;
  lc.constraint = {0, 0, 0, Eigen::Matrix3d::Identity()};

  SUBCASE("valid closure is added") {
    const auto g2 = add_loop_closures(g, {lc});
    REQUIRE(g2.lc_edges.size() == 1);
    CHECK(g2.odom_edges.size() == g.odom_edges.size());
    CHECK(g2.lc_edges[0].i == 1);
    CHECK(g2.lc_edges[0].j == 7);
  }
  SUBCASE("consecutive pair rejected") {
    lc.j = 2;
    CHECK_THROWS(add_loop_closures(g, {lc}));
  }
  SUBCASE("out-of-range index rejected") {
    lc.j = 42;
    CHECK_THROWS(add_loop_closures(g, {lc}));
  }
  SUBCASE("duplicate pair rejected") {
    CHECK_THROWS(add_loop_closures(g, {lc, lc}));
  }
  SUBCASE("non-PD covariance rejected") {
    lc.constraint.covariance = Eigen::Matrix3d::Zero();
    CHECK_THROWS(add_loop_closures(g, {lc}));
  }
}

TEST_CASE("graph json round trip") {
  std::vector<Pose> path = {Pose(0, 0, 0), Pose(1, 0.5, 0.2), Pose(2, 1, -0.4),
                            Pose(3, 0, 1.1), Pose(4, -1, 2.0)};
  auto g = build_graph(path);
  LoopClosure lc;
  lc.i = 0;
  lc.j = 4;
  lc.constraint = {0.1, -0.2, 0.05, 0.5 * Eigen::Matrix3d::Identity()};
  g = add_loop_closures(g, {lc});

  const auto text = graph_to_json(g);
  const auto h = graph_from_json(text);
  REQUIRE(h.vertices.size() == g.vertices.size());
  REQUIRE(h.odom_edges.size() == g.odom_edges.size());
  REQUIRE(h.lc_edges.size() == 1);
  for (size_t k = 0; k < g.vertices.size(); ++k) {
    CHECK(h.vertices[k].x == g.vertices[k].x);
    CHECK(h.vertices[k].y == g.vertices[k].y);
    CHECK(h.vertices[k].phi == g.vertices[k].phi);
  }
  const auto& e = h.lc_edges[0];
  CHECK(e.meas.dx == lc.constraint.dx);
  CHECK(e.meas.covariance(2, 2) == 0.5);
  // serialization is deterministic
  CHECK(graph_to_json(h) == text);

  CHECK_THROWS(graph_from_json("{\"vertices\": \"nope\"}"));
  CHECK_THROWS(graph_from_json("not json"));
}
