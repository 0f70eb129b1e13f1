#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "macs/fiedler.hpp"
#include "macs/graph.hpp"
#include "macs/laplacian.hpp"

namespace macs {

// Relaxed K-edge selection problem: maximize lambda2(L_f + sum x_k L_k^c)
// over 0 <= x <= 1, sum x = K.
struct MacProblem {
  SparseLaplacian fixed_laplacian;
  std::vector<WeightedEdge> candidate_edges;
  int budget = 0;
  double epsilon_u = 1e-2;  // relative duality-gap tolerance
  int max_iterations = 50;
  FiedlerOptions fiedler;
  // Return the final iterate instead of the best-objective iterate.
  bool return_last_iterate = false;
  int active_set_cap = 10000;  // pairwise FW vertex cap
  // Observes every evaluated iterate (before stepping); used to dump
  // per-iteration Laplacians for replay benchmarks.
  std::function<void(int, const Eigen::VectorXd&)> iterate_observer;

  static MacProblem from_graph(const Graph& g, const EdgePartition& p);
  int n() const { return static_cast<int>(fixed_laplacian.rows()); }
  int num_candidates() const {
    return static_cast<int>(candidate_edges.size());
  }
  void validate() const;
};

struct StepRule {
  enum class Kind { NaiveDecay, ExactLineSearch, Backtracking, PairwiseExact };
  Kind kind = Kind::NaiveDecay;
  int max_evals = 20;           // line-search objective evaluations per step
  double initial_curvature = 0.0;  // 0: estimate from a finite difference
  double shrink = 0.5;
  double grow = 2.0;

  static StepRule naive() { return {}; }
  static StepRule exact(int evals = 20) {
    return {Kind::ExactLineSearch, evals, 0.0, 0.5, 2.0};
  }
  static StepRule backtracking(double initial = 0.0, double shrink = 0.5,
                               double grow = 2.0) {
    return {Kind::Backtracking, 20, initial, shrink, grow};
  }
  static StepRule pairwise(int evals = 20) {
    return {Kind::PairwiseExact, evals, 0.0, 0.5, 2.0};
  }
  static StepRule parse(const std::string& name);
  std::string name() const;
};

struct TraceRow {
  int iter = 0;
  double f = 0.0;
  double u = 0.0;
  double gap = 0.0;
  double gamma = 0.0;
  int evals = 0;
  double millis = 0.0;
  bool f_underflow = false;  // gap used the 1e-12 floor instead of f
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  // Columns: iter,f,u,gap,gamma,evals,millis. zero_times blanks the wall
  // clock for byte-reproducible output.
  void write_csv(std::ostream& os, bool zero_times = false) const;
};

struct MacResult {
  Eigen::VectorXd x_relaxed;
  FiedlerPair pair;  // at x_relaxed
  double u_final = 0.0;
  int iterations = 0;
  SolveTrace trace;
  Eigen::VectorXd x_rounded;  // empty until a rounding strategy runs
};

// Shared evaluation state for one solve: fixed assembly pattern, one
// symbolic factorization, eigenvector warm starts, and an evaluation
// counter.
class ObjectiveEvaluator {
 public:
  explicit ObjectiveEvaluator(const MacProblem& problem);

  // tolerate_disconnection: structurally disconnected L(x) yields
  // lambda2 = 0 with a component-indicator carrier vector (still a valid
  // supergradient source) instead of an error.
  FiedlerPair evaluate(const Eigen::VectorXd& x,
                       bool tolerate_disconnection = true);
  int evaluations() const { return count_; }
  const FiedlerStats& solver_stats() const { return solver_.stats(); }

 private:
  const MacProblem& problem_;
  LaplacianAssembler assembler_;
  FiedlerSolver solver_;
  Eigen::VectorXd warm_;
  int count_ = 0;
};

// lambda2 and q2 of L(x); strict about connectivity.
std::pair<double, Eigen::VectorXd> objective(const MacProblem& problem,
                                             const Eigen::VectorXd& x);

// g_k = w_k (q2[u_k] - q2[v_k])^2.
Eigen::VectorXd supergradient(const Eigen::VectorXd& q2,
                              const std::vector<WeightedEdge>& candidates);

// Indicator of the K largest entries; ties broken by lower index.
Eigen::VectorXd direction_topk(const Eigen::VectorXd& g, int K);

double dual_update(double u, double f, const Eigen::VectorXd& g,
                   const Eigen::VectorXd& s, const Eigen::VectorXd& x);

double step_naive(int t);

// Golden-section maximization of a unimodal function on [lo, hi] under an
// evaluation budget. Returns the best evaluated point.
double maximize_scalar(const std::function<double(double)>& phi, double lo,
                       double hi, int max_evals, double* best_value = nullptr);

double step_exact(const MacProblem& problem, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& d, double gamma_max,
                  int max_evals = 20);

struct BacktrackState {
  double curvature = 0.0;
  bool ready = false;
  int failures = 0;  // times the gamma_min fallback fired
};

std::pair<double, BacktrackState> step_backtracking(
    const MacProblem& problem, const Eigen::VectorXd& x,
    const Eigen::VectorXd& d, const Eigen::VectorXd& g, double f,
    BacktrackState state);

MacResult solve_mac(const MacProblem& problem,
                    const StepRule& rule = StepRule::naive(),
                    const Eigen::VectorXd* x0 = nullptr);

MacResult solve_pairwise_fw(const MacProblem& problem,
                            const StepRule& rule = StepRule::pairwise(),
                            const Eigen::VectorXd* x0 = nullptr);

}  // namespace macs
