#include "macs/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "macs/cholesky.hpp"
#include "macs/ordering.hpp"
#include "macs/rounding.hpp"

namespace macs {

EffectiveResistances effective_resistance(
    const SparseLaplacian& L, const std::vector<WeightedEdge>& edges,
    int ground) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n || n < 2) throw Error("need a square Laplacian, n >= 2");
  if (ground < 0 || ground >= n) throw Error("ground node out of range");
  const ComponentLabels comp = laplacian_components(L);
  if (comp.count > 1) throw DisconnectedGraph(comp.count);

  // Reduced system: delete the grounded row/column, then order and factor.
  auto red = [ground](int i) { return i < ground ? i : i - 1; };
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(L.nonZeros());
  for (int c = 0; c < L.outerSize(); ++c)
    for (SparseLaplacian::InnerIterator it(L, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (r == ground || c == ground) continue;
      t.emplace_back(red(r), red(c), it.value());
    }
  SparseLaplacian reduced(n - 1, n - 1);
  reduced.setFromTriplets(t.begin(), t.end());
  reduced.makeCompressed();

  const std::vector<int> perm = amd_ordering(reduced);
  std::vector<int> inv(n - 1);
  for (int i = 0; i < n - 1; ++i) inv[perm[i]] = i;
  std::vector<Eigen::Triplet<double>> tp;
  tp.reserve(reduced.nonZeros());
  for (int c = 0; c < reduced.outerSize(); ++c)
    for (SparseLaplacian::InnerIterator it(reduced, c); it; ++it)
      tp.emplace_back(inv[static_cast<int>(it.row())], inv[c], it.value());
  SparseLaplacian permuted(n - 1, n - 1);
  permuted.setFromTriplets(tp.begin(), tp.end());
  permuted.makeCompressed();

  SparseCholesky chol;
  chol.compute(permuted);

  EffectiveResistances out;
  out.r.resize(static_cast<Eigen::Index>(edges.size()));
  Eigen::VectorXd b(n - 1);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const WeightedEdge& e = edges[k];
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
      throw Error("query edge has invalid endpoints");
    b.setZero();
    if (e.u != ground) b[inv[red(e.u)]] += 1.0;
    if (e.v != ground) b[inv[red(e.v)]] -= 1.0;
    chol.solve_in_place(b);
    double r = 0.0;
    if (e.u != ground) r += b[inv[red(e.u)]];
    if (e.v != ground) r -= b[inv[red(e.v)]];
    if (!(r > 0.0) || !std::isfinite(r))
      throw Error("nonpositive effective resistance (numerical failure)");
    out.r[static_cast<Eigen::Index>(k)] = r;
  }
  return out;
}

Eigen::VectorXd effective_resistance(const Graph& g, int ground) {
  return effective_resistance(build_laplacian(g), g.edges(), ground).r;
}

std::vector<int> spectral_backbone(const Graph& g) {
  const Eigen::VectorXd r = effective_resistance(g);
  Eigen::VectorXd weights(g.num_edges());
  for (int k = 0; k < g.num_edges(); ++k)
    weights[k] = r[k] * g.edge(k).weight;
  return maximum_spanning_tree(g, weights);
}

std::vector<int> odometry_backbone(const Graph& g,
                                   const std::vector<int>& marked,
                                   const std::vector<long long>& original_ids) {
  std::vector<int> picked = marked;
  if (picked.empty()) {
    auto orig = [&](NodeId i) -> long long {
      return original_ids.empty() ? i : original_ids[i];
    };
    for (int k = 0; k < g.num_edges(); ++k) {
      const WeightedEdge& e = g.edge(k);
      if (std::llabs(orig(e.u) - orig(e.v)) == 1) picked.push_back(k);
    }
  }
  std::sort(picked.begin(), picked.end());
  const ComponentLabels comp = connected_components(g, picked);
  if (comp.count != 1)
    throw NotSpanning("backbone leaves " + std::to_string(comp.count) +
                      " components");
  return picked;
}

}  // namespace macs
