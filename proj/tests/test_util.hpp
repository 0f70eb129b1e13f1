#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "macs/generate.hpp"
#include "macs/graph.hpp"

// Independent oracles: everything here is assembled directly from edge
// lists and solved densely, bypassing the library's sparse paths.
namespace testutil {

// make_random_connected with the extra-edge count clamped to what fits
// beside the spanning tree, so random draws never overflow small graphs.
inline macs::Graph random_connected_capped(int n, long long extra,
                                           std::uint64_t seed) {
  const long long cap =
      static_cast<long long>(n) * (n - 1) / 2 - (n - 1);
  return macs::make_random_connected(
      n, static_cast<int>(std::min(extra, cap)), seed);
}

inline Eigen::MatrixXd dense_laplacian(
    int n, const std::vector<macs::WeightedEdge>& edges) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const macs::WeightedEdge& e : edges) {
    L(e.u, e.u) += e.weight;
    L(e.v, e.v) += e.weight;
    L(e.u, e.v) -= e.weight;
    L(e.v, e.u) -= e.weight;
  }
  return L;
}

inline Eigen::MatrixXd dense_laplacian(const macs::Graph& g) {
  return dense_laplacian(g.num_nodes(), g.edges());
}

// Ascending eigenvalues.
inline Eigen::VectorXd dense_spectrum(const Eigen::MatrixXd& L) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L).eigenvalues();
}

inline double dense_lambda2(const Eigen::MatrixXd& L) {
  return dense_spectrum(L)[1];
}

inline Eigen::VectorXd dense_fiedler_vector(const Eigen::MatrixXd& L) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  return es.eigenvectors().col(1);
}

// Calls fn for every K-subset of {0, ..., m-1}.
inline void k_subsets(int m, int K,
                      const std::function<void(const std::vector<int>&)>& fn) {
  if (K < 0 || K > m) return;
  std::vector<int> pick(K);
  for (int i = 0; i < K; ++i) pick[i] = i;
  for (;;) {
    fn(pick);
    int i = K - 1;
    while (i >= 0 && pick[i] == m - K + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < K; ++j) pick[j] = pick[j - 1] + 1;
  }
}

// Exhaustive integral optimum: best lambda2 over all K-subsets of the
// candidates, each unioned with the fixed edges.
inline double brute_force_lambda2(int n,
                                  const std::vector<macs::WeightedEdge>& fixed,
                                  const std::vector<macs::WeightedEdge>& cand,
                                  int K) {
  double best = 0.0;
  k_subsets(static_cast<int>(cand.size()), K,
            [&](const std::vector<int>& pick) {
              std::vector<macs::WeightedEdge> edges = fixed;
              for (int k : pick) edges.push_back(cand[k]);
              best = std::max(best, dense_lambda2(dense_laplacian(n, edges)));
            });
  return best;
}

// Union-find connectivity over an explicit edge subset.
inline bool subset_connected(int n, const std::vector<macs::WeightedEdge>& all,
                             const std::vector<int>& subset) {
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  int comps = n;
  for (int k : subset) {
    const int ra = find(all[k].u), rb = find(all[k].v);
    if (ra != rb) {
      parent[ra] = rb;
      --comps;
    }
  }
  return comps == 1;
}

}  // namespace testutil
