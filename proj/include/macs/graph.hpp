#pragma once

#include <vector>

#include "macs/errors.hpp"

namespace macs {

using NodeId = int;

struct WeightedEdge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;
};

// Weighted undirected simple graph over dense node ids [0, n).
// Edge order is stable: the position of an edge in edges() is its index
// everywhere else in the library.
class Graph {
 public:
  Graph(int num_nodes, std::vector<WeightedEdge> edges);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const WeightedEdge& edge(int k) const { return edges_[k]; }

 private:
  int n_;
  std::vector<WeightedEdge> edges_;
};

// Split of the edge set into fixed edges E^f (always kept) and candidate
// edges E^c (subject to selection), with a budget K over the candidates.
struct EdgePartition {
  std::vector<int> fixed;
  std::vector<int> candidate;
  int budget = 0;
};

// Builds a partition from the fixed edge indices; candidates are the rest.
EdgePartition make_partition(const Graph& g, std::vector<int> fixed,
                             int budget);

// Checks index ranges, disjointness, coverage, and 0 <= budget <= |E^c|.
void validate_partition(const Graph& g, const EdgePartition& p);

struct ComponentLabels {
  int count = 0;
  std::vector<int> label;
};

ComponentLabels connected_components(const Graph& g);

// Components of the subgraph using only the given edge indices.
ComponentLabels connected_components(const Graph& g,
                                     const std::vector<int>& active_edges);

}  // namespace macs
