#include "macs/frank_wolfe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace macs {

namespace {

constexpr double kGapFloor = 1e-12;

double now_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

void check_iterate(const Eigen::VectorXd& x, int mc, int K) {
  if (x.size() != mc) throw Error("x0 has wrong dimension");
  for (int k = 0; k < mc; ++k)
    if (x[k] < -1e-9 || x[k] > 1.0 + 1e-9)
      throw Error("x0 outside [0,1]");
  if (std::abs(x.sum() - K) > 1e-6 * std::max(1, K))
    throw Error("x0 does not sum to the budget");
}

double relative_gap(double u, double f, bool* underflow) {
  const double denom = std::max(f, kGapFloor);
  if (underflow) *underflow = f < kGapFloor;
  return std::abs(u - f) / denom;
}

}  // namespace

MacProblem MacProblem::from_graph(const Graph& g, const EdgePartition& p) {
  validate_partition(g, p);
  MacProblem problem;
  std::vector<WeightedEdge> fixed;
  fixed.reserve(p.fixed.size());
  for (int k : p.fixed) fixed.push_back(g.edge(k));
  problem.fixed_laplacian = build_laplacian(Graph(g.num_nodes(), fixed));
  problem.candidate_edges.reserve(p.candidate.size());
  for (int k : p.candidate) problem.candidate_edges.push_back(g.edge(k));
  problem.budget = p.budget;
  return problem;
}

void MacProblem::validate() const {
  if (n() < 2) throw Error("problem needs at least two nodes");
  if (budget < 0 || budget > num_candidates())
    throw InfeasibleBudget("budget must lie in [0, " +
                           std::to_string(num_candidates()) + "]");
  if (!(epsilon_u > 0.0)) throw Error("epsilon_u must be positive");
  if (max_iterations < 1) throw Error("max_iterations must be positive");
  LaplacianAssembler all(fixed_laplacian, n(), candidate_edges);
  const ComponentLabels comp =
      laplacian_components(all.assemble(Eigen::VectorXd::Ones(
          static_cast<Eigen::Index>(candidate_edges.size()))));
  if (comp.count > 1) throw DisconnectedGraph(comp.count);
}

ObjectiveEvaluator::ObjectiveEvaluator(const MacProblem& problem)
    : problem_(problem),
      assembler_(problem.fixed_laplacian, problem.n(),
                 problem.candidate_edges),
      solver_(assembler_.pattern(), [&] {
        FiedlerOptions o = problem.fiedler;
        o.check_connectivity = false;  // handled structurally below
        return o;
      }()) {}

FiedlerPair ObjectiveEvaluator::evaluate(const Eigen::VectorXd& x,
                                         bool tolerate_disconnection) {
  const SparseLaplacian& L = assembler_.assemble(x);
  ++count_;
  const ComponentLabels comp = laplacian_components(L);
  if (comp.count > 1) {
    if (!tolerate_disconnection) throw DisconnectedGraph(comp.count);
    // lambda2 of a disconnected graph is 0; a deflated component indicator
    // is an eigenvector for it, and its supergradient rewards cut edges.
    FiedlerPair pair;
    pair.lambda2 = 0.0;
    Eigen::VectorXd ind(L.rows());
    for (Eigen::Index i = 0; i < L.rows(); ++i)
      ind[i] = comp.label[static_cast<int>(i)] == 0 ? 1.0 : 0.0;
    pair.q2 = deflate(ind);
    pair.q2.normalize();
    warm_ = pair.q2;
    return pair;
  }
  FiedlerPair pair =
      warm_.size() ? solver_.solve(L, warm_) : solver_.solve(L);
  warm_ = pair.q2;
  return pair;
}

std::pair<double, Eigen::VectorXd> objective(const MacProblem& problem,
                                             const Eigen::VectorXd& x) {
  ObjectiveEvaluator eval(problem);
  FiedlerPair pair = eval.evaluate(x, false);
  return {pair.lambda2, std::move(pair.q2)};
}

Eigen::VectorXd supergradient(const Eigen::VectorXd& q2,
                              const std::vector<WeightedEdge>& candidates) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const WeightedEdge& e = candidates[k];
    const double diff = q2[e.u] - q2[e.v];
    g[static_cast<Eigen::Index>(k)] = e.weight * diff * diff;
  }
  return g;
}

Eigen::VectorXd direction_topk(const Eigen::VectorXd& g, int K) {
  const int m = static_cast<int>(g.size());
  if (K < 0 || K > m) throw InfeasibleBudget("K outside [0, m]");
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return g[a] > g[b]; });
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < K; ++j) s[idx[j]] = 1.0;
  return s;
}

double dual_update(double u, double f, const Eigen::VectorXd& g,
                   const Eigen::VectorXd& s, const Eigen::VectorXd& x) {
  return std::min(u, f + g.dot(s - x));
}

double step_naive(int t) { return 2.0 / (2.0 + t); }

double maximize_scalar(const std::function<double(double)>& phi, double lo,
                       double hi, int max_evals, double* best_value) {
  double best_x = lo;
  double best_f = -std::numeric_limits<double>::infinity();
  if (!(hi > lo) || max_evals < 1) {
    if (best_value) *best_value = best_f;
    return lo;
  }
  int evals = 0;
  auto probe = [&](double t) {
    const double v = phi(t);
    ++evals;
    if (v > best_f) {
      best_f = v;
      best_x = t;
    }
    return v;
  };

  probe(hi);
  if (max_evals < 3) {
    if (best_value) *best_value = best_f;
    return best_x;
  }
  constexpr double invphi = 0.6180339887498949;
  constexpr double invphi2 = 1.0 - invphi;
  double a = lo, b = hi;
  double c = a + invphi2 * (b - a);
  double d = a + invphi * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  while (evals < max_evals && (b - a) > 1e-12 * std::max(1.0, hi - lo)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = a + invphi2 * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = probe(d);
    }
  }
  if (best_value) *best_value = best_f;
  return best_x;
}

namespace {

double line_search_exact(ObjectiveEvaluator& eval, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& d, double gamma_max,
                         int max_evals) {
  if (d.cwiseAbs().maxCoeff() <= 0.0 || !(gamma_max > 0.0)) return 0.0;
  auto phi = [&](double gamma) {
    return eval.evaluate(x + gamma * d).lambda2;
  };
  return maximize_scalar(phi, 0.0, gamma_max, max_evals);
}

double backtrack(ObjectiveEvaluator& eval, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& d, double f, double gd, double dn2,
                 double gamma_max, const StepRule& rule,
                 BacktrackState& state) {
  if (dn2 <= 1e-30 || gd <= 0.0 || !(gamma_max > 0.0)) return 0.0;
  auto phi = [&](double gamma) {
    return eval.evaluate(x + gamma * d).lambda2;
  };
  if (!state.ready) {
    if (rule.initial_curvature > 0.0) {
      state.curvature = rule.initial_curvature;
    } else {
      const double eps = 1e-4 * gamma_max;
      const double fe = phi(eps);
      state.curvature = 2.0 * (f + eps * gd - fe) / (eps * eps * dn2);
    }
    state.curvature = std::max(state.curvature, 1e-300);
    state.ready = true;
  }
  const double gamma_min = 1e-7 * gamma_max;
  double curv = state.curvature * rule.shrink;
  for (int tries = 0; tries < 40; ++tries) {
    curv = std::max(curv, 1e-300);
    double gamma = std::min(gamma_max, gd / (curv * dn2));
    gamma = std::max(gamma, gamma_min);
    const double fg = phi(gamma);
    const double target =
        f + gamma * gd - 0.5 * curv * gamma * gamma * dn2;
    if (fg >= target - 1e-12 * std::max(1.0, std::abs(f))) {
      state.curvature = curv;
      return gamma;
    }
    if (gamma <= gamma_min * (1.0 + 1e-12)) break;
    curv *= rule.grow;
  }
  state.curvature = curv;
  ++state.failures;
  return gamma_min;
}

}  // namespace

double step_exact(const MacProblem& problem, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& d, double gamma_max, int max_evals) {
  ObjectiveEvaluator eval(problem);
  return line_search_exact(eval, x, d, gamma_max, max_evals);
}

std::pair<double, BacktrackState> step_backtracking(
    const MacProblem& problem, const Eigen::VectorXd& x,
    const Eigen::VectorXd& d, const Eigen::VectorXd& g, double f,
    BacktrackState state) {
  ObjectiveEvaluator eval(problem);
  StepRule rule = StepRule::backtracking();
  const double gamma =
      backtrack(eval, x, d, f, g.dot(d), d.squaredNorm(), 1.0, rule, state);
  return {gamma, state};
}

StepRule StepRule::parse(const std::string& name) {
  if (name == "naive") return naive();
  if (name == "exact") return exact();
  if (name == "backtracking") return backtracking();
  if (name == "pfw-exact" || name == "pairwise") return pairwise();
  throw Error("unknown step rule '" + name + "'");
}

std::string StepRule::name() const {
  switch (kind) {
    case Kind::NaiveDecay:
      return "naive";
    case Kind::ExactLineSearch:
      return "exact";
    case Kind::Backtracking:
      return "backtracking";
    case Kind::PairwiseExact:
      return "pfw-exact";
  }
  return "naive";
}

void SolveTrace::write_csv(std::ostream& os, bool zero_times) const {
  os << "iter,f,u,gap,gamma,evals,millis\n";
  char buf[256];
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%d,%.3f\n",
                  r.iter, r.f, r.u, r.gap, r.gamma, r.evals,
                  zero_times ? 0.0 : r.millis);
    os << buf;
  }
}

namespace {

struct BestIterate {
  double f = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
  FiedlerPair pair;

  void offer(double fv, const Eigen::VectorXd& xv, const FiedlerPair& pv) {
    if (fv > f) {
      f = fv;
      x = xv;
      pair = pv;
    }
  }
};

MacResult finish(const MacProblem& problem, ObjectiveEvaluator& eval,
                 Eigen::VectorXd x, double u, BestIterate best,
                 SolveTrace trace, bool stopped,
                 const FiedlerPair& last_pair) {
  MacResult result;
  FiedlerPair pair = last_pair;
  if (!stopped) {
    // The loop exhausted its iterations; the final iterate was stepped to
    // but never evaluated (Alg. 1 returns it unevaluated).
    auto t0 = std::chrono::steady_clock::now();
    const int e0 = eval.evaluations();
    pair = eval.evaluate(x);
    best.offer(pair.lambda2, x, pair);
    if (problem.iterate_observer)
      problem.iterate_observer(static_cast<int>(trace.rows.size()), x);
    TraceRow row;
    row.iter = static_cast<int>(trace.rows.size());
    row.f = pair.lambda2;
    row.u = u;
    row.gap = relative_gap(u, pair.lambda2, &row.f_underflow);
    row.gamma = 0.0;
    row.evals = eval.evaluations() - e0;
    row.millis = now_ms(t0);
    trace.rows.push_back(row);
  }
  if (problem.return_last_iterate || best.x.size() == 0) {
    result.x_relaxed = std::move(x);
    result.pair = std::move(pair);
  } else {
    result.x_relaxed = std::move(best.x);
    result.pair = std::move(best.pair);
  }
  result.u_final = u;
  result.iterations =
      static_cast<int>(trace.rows.size()) - (stopped ? 0 : 1);
  result.trace = std::move(trace);
  return result;
}

}  // namespace

MacResult solve_mac(const MacProblem& problem, const StepRule& rule,
                    const Eigen::VectorXd* x0) {
  if (rule.kind == StepRule::Kind::PairwiseExact)
    return solve_pairwise_fw(problem, rule, x0);
  problem.validate();
  const int mc = problem.num_candidates();
  const int K = problem.budget;

  Eigen::VectorXd x;
  if (x0) {
    check_iterate(*x0, mc, K);
    x = *x0;
  } else {
    x = mc > 0 ? Eigen::VectorXd::Constant(mc, static_cast<double>(K) / mc)
               : Eigen::VectorXd(0);
  }

  ObjectiveEvaluator eval(problem);
  SolveTrace trace;
  BestIterate best;
  BacktrackState bt;
  bt.curvature = rule.initial_curvature;
  double u = std::numeric_limits<double>::infinity();
  FiedlerPair pair;
  bool stopped = false;

  for (int t = 0; t < problem.max_iterations; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    const int e0 = eval.evaluations();
    pair = eval.evaluate(x);
    const double f = pair.lambda2;
    const Eigen::VectorXd g = supergradient(pair.q2, problem.candidate_edges);
    const Eigen::VectorXd s = direction_topk(g, K);
    u = dual_update(u, f, g, s, x);
    best.offer(f, x, pair);
    if (problem.iterate_observer) problem.iterate_observer(t, x);

    TraceRow row;
    row.iter = t;
    row.f = f;
    row.u = u;
    row.gap = relative_gap(u, f, &row.f_underflow);
    const Eigen::VectorXd d = s - x;
    const double dinf = mc > 0 ? d.cwiseAbs().maxCoeff() : 0.0;
    const bool converged = row.gap < problem.epsilon_u;
    double gamma = 0.0;
    if (!converged && dinf > 0.0) {
      switch (rule.kind) {
        case StepRule::Kind::NaiveDecay:
          gamma = step_naive(t);
          break;
        case StepRule::Kind::ExactLineSearch:
          gamma = line_search_exact(eval, x, d, 1.0, rule.max_evals);
          break;
        case StepRule::Kind::Backtracking:
          gamma = backtrack(eval, x, d, f, g.dot(d), d.squaredNorm(), 1.0,
                            rule, bt);
          break;
        case StepRule::Kind::PairwiseExact:
          break;  // dispatched above
      }
      x += gamma * d;
      x = x.cwiseMax(0.0).cwiseMin(1.0);
    }
    row.gamma = gamma;
    row.evals = eval.evaluations() - e0;
    row.millis = now_ms(t0);
    trace.rows.push_back(row);
    if (converged || dinf <= 0.0) {
      stopped = true;
      break;
    }
  }
  return finish(problem, eval, std::move(x), u, std::move(best),
                std::move(trace), stopped, pair);
}

MacResult solve_pairwise_fw(const MacProblem& problem, const StepRule& rule,
                            const Eigen::VectorXd* x0) {
  problem.validate();
  const int mc = problem.num_candidates();
  const int K = problem.budget;

  // Active set: polytope vertex (sorted index set) -> convex weight.
  std::map<std::vector<int>, double> active;
  auto vertex_of = [mc](const Eigen::VectorXd& v) {
    std::vector<int> key;
    for (int k = 0; k < mc; ++k) {
      if (v[k] > 0.5) key.push_back(k);
    }
    return key;
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(mc);
  if (x0) {
    check_iterate(*x0, mc, K);
    for (int k = 0; k < mc; ++k)
      if ((*x0)[k] != 0.0 && (*x0)[k] != 1.0)
        throw Error("pairwise FW needs a vertex (binary) start");
    x = *x0;
  } else if (mc > 0) {
    Eigen::VectorXd w(mc);
    for (int k = 0; k < mc; ++k) w[k] = problem.candidate_edges[k].weight;
    x = direction_topk(w, K);
  }
  active[vertex_of(x)] = 1.0;

  ObjectiveEvaluator eval(problem);
  SolveTrace trace;
  BestIterate best;
  BacktrackState bt;
  bt.curvature = rule.initial_curvature;
  double u = std::numeric_limits<double>::infinity();
  FiedlerPair pair;
  bool stopped = false;

  for (int t = 0; t < problem.max_iterations; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    const int e0 = eval.evaluations();
    pair = eval.evaluate(x);
    const double f = pair.lambda2;
    const Eigen::VectorXd g = supergradient(pair.q2, problem.candidate_edges);
    const Eigen::VectorXd s = direction_topk(g, K);
    u = dual_update(u, f, g, s, x);
    best.offer(f, x, pair);
    if (problem.iterate_observer) problem.iterate_observer(t, x);

    TraceRow row;
    row.iter = t;
    row.f = f;
    row.u = u;
    row.gap = relative_gap(u, f, &row.f_underflow);
    const bool converged = row.gap < problem.epsilon_u;
    double gamma = 0.0;
    bool stalled = false;
    if (!converged) {
      // Away vertex: active vertex minimizing <g, v>; map order breaks ties
      // by lexicographically smallest vertex.
      const std::vector<int> skey = vertex_of(s);
      auto away = active.begin();
      double away_score = std::numeric_limits<double>::infinity();
      for (auto it = active.begin(); it != active.end(); ++it) {
        double score = 0.0;
        for (int k : it->first) score += g[k];
        if (score < away_score) {
          away_score = score;
          away = it;
        }
      }
      if (away->first == skey) {
        stalled = true;  // FW vertex already carries the worst direction
      } else {
        Eigen::VectorXd d = s;
        for (int k : away->first) d[k] -= 1.0;
        const double gamma_max = away->second;
        switch (rule.kind) {
          case StepRule::Kind::NaiveDecay:
            gamma = std::min(step_naive(t), gamma_max);
            break;
          case StepRule::Kind::Backtracking:
            gamma = backtrack(eval, x, d, f, g.dot(d), d.squaredNorm(),
                              gamma_max, rule, bt);
            break;
          case StepRule::Kind::ExactLineSearch:
          case StepRule::Kind::PairwiseExact:
            gamma = line_search_exact(eval, x, d, gamma_max, rule.max_evals);
            break;
        }
        x += gamma * d;
        x = x.cwiseMax(0.0).cwiseMin(1.0);
        away->second -= gamma;
        if (away->second <= 1e-14) active.erase(away);
        active[skey] += gamma;
        for (auto it = active.begin(); it != active.end();) {
          if (it->second <= 1e-14)
            it = active.erase(it);
          else
            ++it;
        }
        if (static_cast<int>(active.size()) > problem.active_set_cap)
          throw ActiveSetOverflow("active set exceeded " +
                                  std::to_string(problem.active_set_cap));
      }
    }
    row.gamma = gamma;
    row.evals = eval.evaluations() - e0;
    row.millis = now_ms(t0);
    trace.rows.push_back(row);
    if (converged || stalled) {
      stopped = true;
      break;
    }
  }
  return finish(problem, eval, std::move(x), u, std::move(best),
                std::move(trace), stopped, pair);
}

}  // namespace macs
