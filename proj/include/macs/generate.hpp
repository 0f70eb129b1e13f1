#pragma once

#include <cstdint>

#include "macs/graph.hpp"

namespace macs {

// Synthetic instances. All generators are deterministic for a fixed seed.

// rows x cols 4-neighbour lattice, unit weights. n = rows*cols,
// m = rows*(cols-1) + cols*(rows-1).
Graph make_grid2d(int rows, int cols);

// nx x ny x nz 6-neighbour lattice, unit weights.
Graph make_grid3d(int nx, int ny, int nz);

// Random geometric graph: n points in the unit square, edge when the
// Euclidean distance is below radius. May be disconnected; callers that
// need connectivity must check. Unit weights.
Graph make_geometric(int n, double radius, std::uint64_t seed);

// Chain 0-1-...-(n-1) plus Bernoulli(p) loop closures over the remaining
// pairs. The chain alone keeps the graph connected. Unit weights.
Graph make_chain_closures(int n, double p, std::uint64_t seed);

// Random spanning tree plus extra_edges distinct random edges, weights
// uniform in [weight_min, weight_max]. Used by tests and benchmarks.
Graph make_random_connected(int n, int extra_edges, std::uint64_t seed,
                            double weight_min = 0.5, double weight_max = 2.0);

}  // namespace macs
