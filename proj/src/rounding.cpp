#include "macs/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "macs/errors.hpp"

namespace macs {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
  int components() {
    int c = 0;
    for (std::size_t i = 0; i < parent.size(); ++i)
      if (find(static_cast<int>(i)) == static_cast<int>(i)) ++c;
    return c;
  }
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Systematic sampling from inclusion probabilities pi (0 <= pi_k <= 1,
// sum = K). Returns exactly K strictly increasing indices.
std::vector<int> madow_draw(const Eigen::VectorXd& pi, int K,
                            std::mt19937_64& rng) {
  const int m = static_cast<int>(pi.size());
  std::vector<int> chosen;
  if (K <= 0) return chosen;
  std::vector<double> cum(m);
  double run = 0.0;
  for (int k = 0; k < m; ++k) {
    run += std::max(0.0, pi[k]);
    cum[k] = run;
  }
  const double U = uniform01(rng);
  chosen.reserve(K);
  int k = 0;
  for (int i = 0; i < K; ++i) {
    const double target = U + i;
    while (k < m - 1 && cum[k] <= target) ++k;
    if (!chosen.empty() && k <= chosen.back())
      k = chosen.back() + 1;  // guards fp drift; intervals never exceed 1
    if (k >= m) break;
    chosen.push_back(k);
  }
  // fp-defensive padding; unreachable when sum(pi) = K holds
  for (int j = m - 1; static_cast<int>(chosen.size()) < K && j >= 0; --j)
    if (!std::binary_search(chosen.begin(), chosen.end(), j))
      chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), j), j);
  return chosen;
}

void check_unit_box(const Eigen::VectorXd& x) {
  for (int k = 0; k < x.size(); ++k)
    if (x[k] < -1e-9 || x[k] > 1.0 + 1e-9 || !std::isfinite(x[k]))
      throw Error("selection vector outside [0,1]");
}

// Kruskal with optional pre-joined fixed edges; order holds candidate
// positions sorted by priority. Returns tree positions; comp_count reports
// the final component count over all n nodes.
std::vector<int> kruskal_positions(const Graph& g,
                                   const std::vector<int>& fixed,
                                   const std::vector<int>& candidates,
                                   const std::vector<int>& order,
                                   int* comp_count) {
  UnionFind uf(g.num_nodes());
  for (int e : fixed) uf.unite(g.edge(e).u, g.edge(e).v);
  std::vector<int> tree;
  for (int pos : order) {
    const WeightedEdge& e = g.edge(candidates[pos]);
    if (uf.unite(e.u, e.v)) tree.push_back(pos);
  }
  if (comp_count) *comp_count = uf.components();
  return tree;
}

std::vector<int> by_value_desc(const Eigen::VectorXd& v) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v[a] > v[b]; });
  return order;
}

}  // namespace

RoundedSelection round_topk(const Eigen::VectorXd& x, int K) {
  const int m = static_cast<int>(x.size());
  if (K < 0 || K > m) throw InfeasibleBudget("K outside [0, m]");
  check_unit_box(x);
  const std::vector<int> order = by_value_desc(x);
  RoundedSelection out;
  out.strategy = "topk";
  out.chosen.assign(order.begin(), order.begin() + K);
  std::sort(out.chosen.begin(), out.chosen.end());
  return out;
}

RoundedSelection round_madow(const Eigen::VectorXd& x, int K,
                             std::uint64_t seed) {
  const int m = static_cast<int>(x.size());
  if (K < 0 || K > m) throw InfeasibleBudget("K outside [0, m]");
  check_unit_box(x);
  const double sum = x.sum();
  if (std::abs(sum - K) > 1e-6 * std::max(1, K))
    throw BudgetMismatch("sum(x) = " + std::to_string(sum) +
                         " but K = " + std::to_string(K));
  RoundedSelection out;
  out.strategy = "madow";
  out.seed = seed;
  if (K == 0) return out;
  Eigen::VectorXd pi = x * (static_cast<double>(K) / sum);
  pi = pi.cwiseMin(1.0);
  std::mt19937_64 rng(seed);
  out.chosen = madow_draw(pi, K, rng);
  return out;
}

std::vector<int> maximum_spanning_tree(const Graph& g,
                                       const Eigen::VectorXd& weights,
                                       const std::vector<int>& restrict_to) {
  if (weights.size() != g.num_edges())
    throw Error("one weight per edge required");
  std::vector<int> order;
  if (restrict_to.empty()) {
    order.resize(g.num_edges());
    std::iota(order.begin(), order.end(), 0);
  } else {
    order = restrict_to;
    std::sort(order.begin(), order.end());
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weights[a] > weights[b]; });

  UnionFind uf(g.num_nodes());
  std::vector<int> tree;
  for (int e : order) {
    const WeightedEdge& edge = g.edge(e);
    if (uf.unite(edge.u, edge.v)) tree.push_back(e);
  }
  const int comps = uf.components();
  if (comps > 1) throw DisconnectedGraph(comps);
  std::sort(tree.begin(), tree.end());
  return tree;
}

RoundedSelection round_mst_connected(const Graph& g,
                                     const std::vector<int>& fixed,
                                     const std::vector<int>& candidates,
                                     const Eigen::VectorXd& x, int K) {
  const int m = static_cast<int>(candidates.size());
  if (x.size() != m) throw Error("x and candidates disagree");
  if (K < 0 || K > m) throw InfeasibleBudget("K outside [0, m]");
  check_unit_box(x);

  const std::vector<int> order = by_value_desc(x);
  int comps = 0;
  std::vector<int> tree = kruskal_positions(g, fixed, candidates, order,
                                            &comps);
  if (comps > 1) throw DisconnectedGraph(comps);
  if (static_cast<int>(tree.size()) > K)
    throw BudgetTooSmall("connectivity needs " +
                         std::to_string(tree.size()) + " edges but K = " +
                         std::to_string(K));

  std::vector<char> in_tree(m, 0);
  for (int pos : tree) in_tree[pos] = 1;
  RoundedSelection out;
  out.strategy = "mst";
  out.chosen = tree;
  int remaining = K - static_cast<int>(tree.size());
  for (int pos : order) {
    if (remaining == 0) break;
    if (in_tree[pos]) continue;
    out.chosen.push_back(pos);
    --remaining;
  }
  std::sort(out.chosen.begin(), out.chosen.end());
  return out;
}

RoundedSelection round_mst_madow(const Graph& g, const std::vector<int>& fixed,
                                 const std::vector<int>& candidates,
                                 const Eigen::VectorXd& x, int K,
                                 std::uint64_t seed) {
  const int m = static_cast<int>(candidates.size());
  if (x.size() != m) throw Error("x and candidates disagree");
  if (K < 0 || K > m) throw InfeasibleBudget("K outside [0, m]");
  check_unit_box(x);

  const std::vector<int> order = by_value_desc(x);
  int comps = 0;
  std::vector<int> tree = kruskal_positions(g, fixed, candidates, order,
                                            &comps);
  if (comps > 1) throw DisconnectedGraph(comps);
  if (static_cast<int>(tree.size()) > K)
    throw BudgetTooSmall("connectivity needs " +
                         std::to_string(tree.size()) + " edges but K = " +
                         std::to_string(K));

  std::vector<char> taken(m, 0);
  for (int pos : tree) taken[pos] = 1;
  RoundedSelection out;
  out.strategy = "mst-madow";
  out.seed = seed;
  out.chosen = tree;

  int need = K - static_cast<int>(tree.size());
  std::vector<int> free;
  for (int pos = 0; pos < m; ++pos)
    if (!taken[pos]) free.push_back(pos);

  Eigen::VectorXd residual(static_cast<Eigen::Index>(free.size()));
  std::vector<char> avail(free.size(), 1);
  for (std::size_t i = 0; i < free.size(); ++i) residual[i] = x[free[i]];
  if (need > 0 && residual.sum() <= 1e-12)
    residual.setOnes();  // degenerate residuals: uniform fallback

  // Renormalize to sum `need`, forcing any probability that caps at 1.
  while (need > 0) {
    const double total = residual.sum();
    if (total <= 0.0) {
      // Positive mass ran out; spread uniformly over what is left.
      for (Eigen::Index i = 0; i < residual.size(); ++i)
        residual[i] = avail[i] ? 1.0 : 0.0;
      continue;
    }
    const double scale = static_cast<double>(need) / total;
    bool forced_any = false;
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      if (!avail[i] || residual[i] <= 0.0) continue;
      if (residual[i] * scale >= 1.0 - 1e-12) {
        out.chosen.push_back(free[i]);
        residual[i] = 0.0;
        avail[i] = 0;
        --need;
        forced_any = true;
      }
    }
    if (!forced_any) {
      residual *= scale;
      break;
    }
  }

  if (need > 0) {
    std::mt19937_64 rng(seed);
    const std::vector<int> picked = madow_draw(residual, need, rng);
    for (int i : picked) out.chosen.push_back(free[i]);
  }
  std::sort(out.chosen.begin(), out.chosen.end());
  return out;
}

RoundingKind parse_rounding(const std::string& name) {
  if (name == "madow") return RoundingKind::Madow;
  if (name == "topk") return RoundingKind::TopK;
  if (name == "mst") return RoundingKind::Mst;
  if (name == "mst-madow") return RoundingKind::MstMadow;
  throw Error("unknown rounding strategy '" + name + "'");
}

std::string rounding_name(RoundingKind kind) {
  switch (kind) {
    case RoundingKind::Madow:
      return "madow";
    case RoundingKind::TopK:
      return "topk";
    case RoundingKind::Mst:
      return "mst";
    case RoundingKind::MstMadow:
      return "mst-madow";
  }
  return "madow";
}

RoundedSelection round_selection(RoundingKind kind, const Graph& g,
                                 const std::vector<int>& fixed,
                                 const std::vector<int>& candidates,
                                 const Eigen::VectorXd& x, int K,
                                 std::uint64_t seed) {
  switch (kind) {
    case RoundingKind::Madow:
      return round_madow(x, K, seed);
    case RoundingKind::TopK:
      return round_topk(x, K);
    case RoundingKind::Mst:
      return round_mst_connected(g, fixed, candidates, x, K);
    case RoundingKind::MstMadow:
      return round_mst_madow(g, fixed, candidates, x, K, seed);
  }
  throw Error("unknown rounding strategy");
}

}  // namespace macs
