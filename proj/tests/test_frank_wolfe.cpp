#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "macs/frank_wolfe.hpp"
#include "macs/generate.hpp"
#include "macs/laplacian.hpp"
#include "macs/rounding.hpp"
#include "test_util.hpp"

using namespace macs;

namespace {

MacProblem small_problem(std::uint64_t seed, int n, int extra, int K) {
  const Graph g = make_random_connected(n, extra, seed);
  MacProblem p = MacProblem::from_graph(
      g, make_partition(g, {}, std::min(K, g.num_edges())));
  p.fiedler.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("supergradient is the squared weighted potential drop") {
  const std::vector<WeightedEdge> cand{{0, 1, 2.0}, {1, 2, 0.5}};
  Eigen::VectorXd q(3);
  q << 0.3, -0.1, 0.5;
  const Eigen::VectorXd g = supergradient(q, cand);
  CHECK(g[0] == doctest::Approx(2.0 * 0.16).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(0.5 * 0.36).epsilon(1e-14));
}

TEST_CASE("supergradient matches central finite differences") {
  std::mt19937_64 rng(5);
  const Graph g = make_random_connected(9, 8, 31);
  const int mc = g.num_edges() - 2;
  std::vector<int> fixed{0, 1};
  MacProblem p =
      MacProblem::from_graph(g, make_partition(g, fixed, mc / 2));

  std::uniform_real_distribution<double> mid(0.35, 0.65);
  Eigen::VectorXd x(mc);
  for (int k = 0; k < mc; ++k) x[k] = mid(rng);

  const auto [f, q2] = objective(p, x);
  const Eigen::VectorXd grad = supergradient(q2, p.candidate_edges);
  const double h = 1e-6;
  for (int k = 0; k < mc; ++k) {
    Eigen::VectorXd hi = x, lo = x;
    hi[k] += h;
    lo[k] -= h;
    const double fd =
        (objective(p, hi).first - objective(p, lo).first) / (2.0 * h);
    if (std::abs(grad[k]) > 1e-8)
      CHECK(fd == doctest::Approx(grad[k]).epsilon(1e-4));
  }
}

TEST_CASE("direction picks the K largest entries, ties to lower index") {
  Eigen::VectorXd g(5);
  g << 0.5, 0.9, 0.5, 0.1, 0.9;
  const Eigen::VectorXd s = direction_topk(g, 3);
  CHECK(s.sum() == doctest::Approx(3.0));
  CHECK(s[1] == 1.0);
  CHECK(s[4] == 1.0);
  CHECK(s[0] == 1.0);  // 0.5 tie resolved toward index 0
  CHECK(s[2] == 0.0);

  CHECK(direction_topk(g, 0).sum() == 0.0);
  CHECK(direction_topk(g, 5).sum() == doctest::Approx(5.0));
  CHECK_THROWS_AS(direction_topk(g, 6), InfeasibleBudget);
  CHECK_THROWS_AS(direction_topk(g, -1), InfeasibleBudget);
}

TEST_CASE("dual update tightens monotonically") {
  Eigen::VectorXd g(2), s(2), x(2);
  g << 1.0, 2.0;
  s << 0.0, 1.0;
  x << 0.5, 0.5;
  const double inf = std::numeric_limits<double>::infinity();
  const double u1 = dual_update(inf, 1.0, g, s, x);
  CHECK(u1 == doctest::Approx(1.0 + (-0.5 + 1.0)).epsilon(1e-14));
  const double u2 = dual_update(u1, 5.0, g, s, x);  // worse bound is ignored
  CHECK(u2 == u1);
}

TEST_CASE("naive decay follows 2 / (2 + t)") {
  CHECK(step_naive(0) == doctest::Approx(1.0));
  CHECK(step_naive(1) == doctest::Approx(2.0 / 3.0));
  CHECK(step_naive(8) == doctest::Approx(0.2));
}

TEST_CASE("scalar maximization locates a parabola peak") {
  const auto phi = [](double t) { return -(t - 0.37) * (t - 0.37); };
  double best = 0.0;
  const double t0 = maximize_scalar(phi, 0.0, 1.0, 30, &best);
  CHECK(t0 == doctest::Approx(0.37).epsilon(1e-4));
  CHECK(best == doctest::Approx(0.0).epsilon(1e-6));

  // monotone increasing: the hi endpoint wins
  const double t1 = maximize_scalar([](double t) { return t; }, 0.0, 2.0, 20);
  CHECK(t1 == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("exact line search improves the objective on a real instance") {
  MacProblem p = small_problem(77, 8, 10, 6);
  const int mc = p.num_candidates();
  Eigen::VectorXd x =
      Eigen::VectorXd::Constant(mc, static_cast<double>(p.budget) / mc);
  const auto [f0, q2] = objective(p, x);
  const Eigen::VectorXd g = supergradient(q2, p.candidate_edges);
  const Eigen::VectorXd d = direction_topk(g, p.budget) - x;
  const double gamma = step_exact(p, x, d, 1.0, 25);
  CHECK(gamma >= 0.0);
  CHECK(gamma <= 1.0);
  CHECK(objective(p, x + gamma * d).first >= f0 - 1e-10);
}

TEST_CASE("backtracking returns a feasible productive step") {
  MacProblem p = small_problem(42, 8, 9, 5);
  const int mc = p.num_candidates();
  Eigen::VectorXd x =
      Eigen::VectorXd::Constant(mc, static_cast<double>(p.budget) / mc);
  const auto [f, q2] = objective(p, x);
  const Eigen::VectorXd g = supergradient(q2, p.candidate_edges);
  const Eigen::VectorXd d = direction_topk(g, p.budget) - x;
  const auto [gamma, state] = step_backtracking(p, x, d, g, f, {});
  CHECK(gamma > 0.0);
  CHECK(gamma <= 1.0);
  CHECK(state.curvature > 0.0);
  // estimated curvature gets reused and refined on the next step
  const auto [gamma2, state2] =
      step_backtracking(p, x + gamma * d, d, g, f, state);
  CHECK(gamma2 > 0.0);
}

TEST_CASE("solve_mac iterates stay inside the scaled simplex") {
  MacProblem p = small_problem(11, 10, 14, 7);
  p.max_iterations = 12;
  p.epsilon_u = 1e-9;
  std::vector<Eigen::VectorXd> iterates;
  p.iterate_observer = [&iterates](int, const Eigen::VectorXd& x) {
    iterates.push_back(x);
  };
  const MacResult res = solve_mac(p, StepRule::naive());
  CHECK_FALSE(iterates.empty());
  for (const Eigen::VectorXd& x : iterates) {
    CHECK(x.minCoeff() >= -1e-12);
    CHECK(x.maxCoeff() <= 1.0 + 1e-12);
    CHECK(x.sum() == doctest::Approx(static_cast<double>(p.budget))
                         .epsilon(1e-9));
  }
  // the dual column never increases along the trace
  for (std::size_t i = 1; i < res.trace.rows.size(); ++i)
    CHECK(res.trace.rows[i].u <= res.trace.rows[i - 1].u + 1e-12);
  // u is a valid bound on every evaluated f
  for (const TraceRow& row : res.trace.rows)
    CHECK(row.f <= res.u_final + 1e-9);
}

TEST_CASE("solve_mac converges instantly at trivial budgets") {
  MacProblem p = small_problem(19, 7, 6, 0);
  MacResult res = solve_mac(p);
  CHECK(res.iterations <= 1);
  CHECK(res.x_relaxed.cwiseAbs().maxCoeff() == 0.0);

  MacProblem full = small_problem(19, 7, 6, 1000000);
  full.budget = full.num_candidates();
  MacResult all = solve_mac(full);
  CHECK(all.iterations <= 1);
  CHECK(all.x_relaxed.minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("solve_mac validates user starting points") {
  MacProblem p = small_problem(23, 8, 8, 4);
  const int mc = p.num_candidates();
  Eigen::VectorXd bad_size(mc + 1);
  bad_size.setZero();
  CHECK_THROWS_AS(solve_mac(p, StepRule::naive(), &bad_size), Error);

  Eigen::VectorXd off_simplex = Eigen::VectorXd::Zero(mc);
  off_simplex[0] = 1.0;  // sums to 1, needs 4
  CHECK_THROWS_AS(solve_mac(p, StepRule::naive(), &off_simplex), Error);

  Eigen::VectorXd outside =
      Eigen::VectorXd::Constant(mc, static_cast<double>(p.budget) / mc);
  outside[0] = 1.5;
  outside[1] -= 0.5;
  CHECK_THROWS_AS(solve_mac(p, StepRule::naive(), &outside), Error);
}

TEST_CASE("best iterate beats the last unless asked otherwise") {
  MacProblem p = small_problem(31, 9, 12, 6);
  p.max_iterations = 10;
  p.epsilon_u = 1e-12;
  const MacResult best = solve_mac(p, StepRule::naive());
  p.return_last_iterate = true;
  const MacResult last = solve_mac(p, StepRule::naive());
  CHECK(best.pair.lambda2 >= last.pair.lambda2 - 1e-12);
  CHECK(best.u_final == doctest::Approx(last.u_final).epsilon(1e-12));
}

TEST_CASE("trace csv is reproducible with zeroed timing") {
  MacProblem p = small_problem(59, 8, 9, 5);
  p.max_iterations = 6;
  const MacResult a = solve_mac(p, StepRule::exact());
  const MacResult b = solve_mac(p, StepRule::exact());
  std::ostringstream osa, osb;
  a.trace.write_csv(osa, true);
  b.trace.write_csv(osb, true);
  CHECK(osa.str() == osb.str());
  CHECK(osa.str().rfind("iter,f,u,gap,gamma,evals,millis", 0) == 0);
}

TEST_CASE("problem validation catches structural issues") {
  // union of fixed and candidates must connect the graph
  const Graph g(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  MacProblem p = MacProblem::from_graph(g, make_partition(g, {}, 1));
  CHECK_THROWS_AS(p.validate(), DisconnectedGraph);

  MacProblem q = small_problem(3, 6, 5, 3);
  q.budget = q.num_candidates() + 1;
  CHECK_THROWS_AS(q.validate(), InfeasibleBudget);
  q.budget = -1;
  CHECK_THROWS_AS(q.validate(), InfeasibleBudget);
  q = small_problem(3, 6, 5, 3);
  q.epsilon_u = 0.0;
  CHECK_THROWS_AS(q.validate(), Error);
  q = small_problem(3, 6, 5, 3);
  q.max_iterations = 0;
  CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("from_graph splits fixed and candidate edges") {
  const Graph g(4, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 4.0}});
  const MacProblem p = MacProblem::from_graph(g, make_partition(g, {0, 2}, 1));
  CHECK(p.n() == 4);
  CHECK(p.num_candidates() == 2);
  CHECK(p.candidate_edges[0].weight == 1.0);
  CHECK(p.candidate_edges[1].weight == 4.0);
  const Eigen::MatrixXd F(p.fixed_laplacian);
  CHECK(F(0, 1) == -2.0);
  CHECK(F(2, 3) == -1.0);
  CHECK(F(0, 3) == 0.0);  // candidate edges stay out of the fixed part
}

TEST_CASE("evaluator tolerates structural disconnection, objective() not") {
  const Graph g(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  MacProblem p = MacProblem::from_graph(g, make_partition(g, {0, 2}, 1));
  Eigen::VectorXd x(1);
  x << 0.0;  // drops the only bridge between {0,1} and {2,3}
  ObjectiveEvaluator eval(p);
  const FiedlerPair pair = eval.evaluate(x);
  CHECK(pair.lambda2 == 0.0);
  CHECK(pair.q2.norm() > 0.0);
  CHECK(std::abs(pair.q2.sum()) <= 1e-9);  // still deflated
  CHECK(eval.evaluations() == 1);
  CHECK_THROWS_AS(objective(p, x), DisconnectedGraph);
}

TEST_CASE("pairwise FW needs a vertex start and stays binary-supported") {
  MacProblem p = small_problem(67, 8, 10, 5);
  const int mc = p.num_candidates();
  Eigen::VectorXd interior =
      Eigen::VectorXd::Constant(mc, static_cast<double>(p.budget) / mc);
  CHECK_THROWS_AS(solve_pairwise_fw(p, StepRule::pairwise(), &interior),
                  Error);

  p.max_iterations = 15;
  const MacResult res = solve_pairwise_fw(p, StepRule::pairwise());
  CHECK(res.x_relaxed.sum() ==
        doctest::Approx(static_cast<double>(p.budget)).epsilon(1e-9));
  CHECK(res.x_relaxed.minCoeff() >= -1e-12);
  CHECK(res.x_relaxed.maxCoeff() <= 1.0 + 1e-12);
  CHECK(res.pair.lambda2 <= res.u_final + 1e-9);
}

TEST_CASE("pairwise and exact agree through their dual bounds") {
  MacProblem p = small_problem(83, 7, 8, 4);
  p.max_iterations = 120;
  p.epsilon_u = 1e-6;
  const MacResult ex = solve_mac(p, StepRule::exact());
  const MacResult pw = solve_mac(p, StepRule::pairwise());
  CHECK(ex.pair.lambda2 <= pw.u_final + 1e-6);
  CHECK(pw.pair.lambda2 <= ex.u_final + 1e-6);
}

TEST_CASE("active set overflow raises") {
  MacProblem p = small_problem(29, 10, 16, 8);
  p.active_set_cap = 1;
  p.max_iterations = 30;
  p.epsilon_u = 1e-12;
  CHECK_THROWS_AS(solve_pairwise_fw(p), ActiveSetOverflow);
}

TEST_CASE("step rule parsing round-trips") {
  CHECK(StepRule::parse("naive").kind == StepRule::Kind::NaiveDecay);
  CHECK(StepRule::parse("exact").kind == StepRule::Kind::ExactLineSearch);
  CHECK(StepRule::parse("backtracking").kind == StepRule::Kind::Backtracking);
  CHECK(StepRule::parse("pfw-exact").kind == StepRule::Kind::PairwiseExact);
  CHECK(StepRule::parse("pairwise").kind == StepRule::Kind::PairwiseExact);
  CHECK_THROWS_AS(StepRule::parse("sgd"), Error);
  for (const char* name : {"naive", "exact", "backtracking", "pfw-exact"})
    CHECK(StepRule::parse(name).name() == name);
}

TEST_CASE("all step rules respect the sandwich on one instance") {
  const Graph g = make_random_connected(6, 4, 2718);
  const int K = 6;  // above n-1, so connected K-subsets exist
  MacProblem p = MacProblem::from_graph(g, make_partition(g, {}, K));
  p.max_iterations = 40;
  const double best = testutil::brute_force_lambda2(
      g.num_nodes(), {}, g.edges(), K);
  std::vector<int> cand(g.num_edges());
  for (int k = 0; k < g.num_edges(); ++k) cand[k] = k;
  for (const char* name : {"naive", "exact", "backtracking", "pfw-exact"}) {
    const MacResult res = solve_mac(p, StepRule::parse(name));
    // integer optimum sits between any rounded selection and the dual bound
    CHECK(best <= res.u_final + 1e-6);
    for (RoundingKind kind : {RoundingKind::TopK, RoundingKind::Mst}) {
      const RoundedSelection sel =
          round_selection(kind, g, {}, cand, res.x_relaxed, K, 5);
      std::vector<WeightedEdge> picked;
      for (int k : sel.chosen) picked.push_back(g.edge(k));
      const double rounded = testutil::dense_lambda2(
          testutil::dense_laplacian(g.num_nodes(), picked));
      CHECK(rounded <= best + 1e-9);
    }
  }
}
