#include "macs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace macs {

namespace {

std::uint64_t pair_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

}  // namespace

Graph::Graph(int num_nodes, std::vector<WeightedEdge> edges)
    : n_(num_nodes), edges_(std::move(edges)) {
  if (n_ < 0) throw Error("node count must be nonnegative");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const WeightedEdge& e = edges_[k];
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
      throw Error("edge " + std::to_string(k) + " has endpoint out of range");
    if (e.u == e.v)
      throw Error("edge " + std::to_string(k) + " is a self-loop");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw Error("edge " + std::to_string(k) + " has nonpositive weight");
    if (!seen.insert(pair_key(e.u, e.v)).second)
      throw Error("edge " + std::to_string(k) + " duplicates an earlier edge");
  }
}

EdgePartition make_partition(const Graph& g, std::vector<int> fixed,
                             int budget) {
  std::sort(fixed.begin(), fixed.end());
  std::vector<char> is_fixed(g.num_edges(), 0);
  for (int k : fixed) {
    if (k < 0 || k >= g.num_edges())
      throw Error("fixed edge index out of range");
    is_fixed[k] = 1;
  }
  EdgePartition p;
  p.fixed = std::move(fixed);
  for (int k = 0; k < g.num_edges(); ++k)
    if (!is_fixed[k]) p.candidate.push_back(k);
  p.budget = budget;
  validate_partition(g, p);
  return p;
}

void validate_partition(const Graph& g, const EdgePartition& p) {
  const int m = g.num_edges();
  std::vector<char> mark(m, 0);
  for (int k : p.fixed) {
    if (k < 0 || k >= m) throw Error("fixed edge index out of range");
    if (mark[k]++) throw Error("edge appears twice in the partition");
  }
  for (int k : p.candidate) {
    if (k < 0 || k >= m) throw Error("candidate edge index out of range");
    if (mark[k]++) throw Error("edge appears twice in the partition");
  }
  for (int k = 0; k < m; ++k)
    if (!mark[k]) throw Error("edge missing from the partition");
  if (p.budget < 0 || p.budget > static_cast<int>(p.candidate.size()))
    throw InfeasibleBudget("budget must lie in [0, |candidates|]");
}

namespace {

ComponentLabels components_from_adjacency(
    int n, const std::vector<std::vector<int>>& adj) {
  ComponentLabels out;
  out.label.assign(n, -1);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (out.label[s] != -1) continue;
    const int c = out.count++;
    out.label[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v]) {
        if (out.label[w] == -1) {
          out.label[w] = c;
          stack.push_back(w);
        }
      }
    }
  }
  return out;
}

}  // namespace

ComponentLabels connected_components(const Graph& g) {
  std::vector<int> all(g.num_edges());
  std::iota(all.begin(), all.end(), 0);
  return connected_components(g, all);
}

ComponentLabels connected_components(const Graph& g,
                                     const std::vector<int>& active_edges) {
  std::vector<std::vector<int>> adj(g.num_nodes());
  for (int k : active_edges) {
    const WeightedEdge& e = g.edge(k);
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return components_from_adjacency(g.num_nodes(), adj);
}

}  // namespace macs
