#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "macs/backbone.hpp"
#include "macs/generate.hpp"
#include "macs/laplacian.hpp"
#include "test_util.hpp"

using namespace macs;

namespace {

Eigen::VectorXd pinv_resistances(const Graph& g) {
  const Eigen::MatrixXd L = testutil::dense_laplacian(g);
  const Eigen::MatrixXd pinv = L.completeOrthogonalDecomposition()
                                   .pseudoInverse();
  Eigen::VectorXd r(g.num_edges());
  for (int k = 0; k < g.num_edges(); ++k) {
    const WeightedEdge& e = g.edge(k);
    r[k] = pinv(e.u, e.u) + pinv(e.v, e.v) - 2.0 * pinv(e.u, e.v);
  }
  return r;
}

}  // namespace

TEST_CASE("unit triangle: every edge has resistance 2/3") {
  const Graph g(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  const Eigen::VectorXd r = effective_resistance(g);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(r[k] - 2.0 / 3.0) <= 1e-12);
}

TEST_CASE("bridges satisfy w * r = 1 exactly") {
  // two triangles joined by one bridge (edge index 3)
  const Graph g(6, {{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 1.5}, {2, 3, 0.8},
                    {3, 4, 1.0}, {4, 5, 2.0}, {3, 5, 1.0}});
  const Eigen::VectorXd r = effective_resistance(g);
  CHECK(r[3] * 0.8 == doctest::Approx(1.0).epsilon(1e-12));
  // series path: r of a path edge equals 1/w
  const Graph path(4, {{0, 1, 2.0}, {1, 2, 4.0}, {2, 3, 0.5}});
  const Eigen::VectorXd rp = effective_resistance(path);
  CHECK(rp[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rp[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rp[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("foster's theorem holds on random graphs") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 50);
    const Graph g = make_random_connected(
        n, static_cast<int>(rng() % (2 * n)), rng());
    const Eigen::VectorXd r = effective_resistance(g);
    double sum = 0.0;
    for (int k = 0; k < g.num_edges(); ++k)
      sum += r[k] * g.edge(k).weight;
    CHECK(sum == doctest::Approx(n - 1.0).epsilon(1e-8));
    CHECK(r.minCoeff() > 0.0);
  }
}

TEST_CASE("resistances agree with the dense pseudo-inverse") {
  std::mt19937_64 rng(707);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 50);
    const Graph g = make_random_connected(
        n, static_cast<int>(rng() % (2 * n)), rng());
    const Eigen::VectorXd got = effective_resistance(g);
    const Eigen::VectorXd want = pinv_resistances(g);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("the grounded node does not affect resistances") {
  const Graph g = make_random_connected(25, 30, 12);
  const Eigen::VectorXd r0 = effective_resistance(g, 0);
  const Eigen::VectorXd rl = effective_resistance(g, 24);
  const Eigen::VectorXd rm = effective_resistance(g, 11);
  CHECK((r0 - rl).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((r0 - rm).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("effective resistance requires connectivity") {
  const Graph g(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_AS(effective_resistance(g), DisconnectedGraph);
}

TEST_CASE("spectral backbone is a spanning tree that keeps bridges") {
  std::mt19937_64 rng(313);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + static_cast<int>(rng() % 20);
    const Graph g = make_random_connected(
        n, static_cast<int>(rng() % (2 * n)), rng());
    const std::vector<int> tree = spectral_backbone(g);
    REQUIRE(static_cast<int>(tree.size()) == n - 1);
    CHECK(testutil::subset_connected(n, g.edges(), tree));
  }

  // barbell: two K4 blobs and one bridge; the bridge must be kept
  std::vector<WeightedEdge> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) edges.push_back({i, j, 1.0});
  for (int i = 4; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) edges.push_back({i, j, 1.0});
  edges.push_back({3, 4, 0.1});  // the weak bridge
  const Graph barbell(8, edges);
  const std::vector<int> tree = spectral_backbone(barbell);
  CHECK(std::find(tree.begin(), tree.end(),
                  static_cast<int>(edges.size()) - 1) != tree.end());
}

TEST_CASE("odometry backbone prefers markers, falls back to id gaps") {
  // chain 0-1-2-3 plus chords, original ids consecutive
  const Graph g(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 2, 1.0},
                    {0, 3, 1.0}});
  CHECK(odometry_backbone(g, {}, {}) == std::vector<int>{0, 1, 2});

  // explicit markers win even when more edges look like odometry
  CHECK(odometry_backbone(g, {0, 1, 2}, {}) == std::vector<int>{0, 1, 2});

  // original ids with gaps: only |diff| == 1 pairs count
  const std::vector<long long> ids{10, 11, 20, 21};
  CHECK_THROWS_AS(odometry_backbone(g, {}, ids), NotSpanning);

  // marked edges that do not span
  CHECK_THROWS_AS(odometry_backbone(g, {0, 1}, {}), NotSpanning);
}
