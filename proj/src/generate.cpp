#include "macs/generate.hpp"

#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "macs/errors.hpp"

namespace macs {

Graph make_grid2d(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error("grid2d needs positive dimensions");
  std::vector<WeightedEdge> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

Graph make_grid3d(int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw Error("grid3d needs positive dimensions");
  std::vector<WeightedEdge> edges;
  auto id = [ny, nz](int x, int y, int z) { return (x * ny + y) * nz + z; };
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      for (int z = 0; z < nz; ++z) {
        if (z + 1 < nz) edges.push_back({id(x, y, z), id(x, y, z + 1), 1.0});
        if (y + 1 < ny) edges.push_back({id(x, y, z), id(x, y + 1, z), 1.0});
        if (x + 1 < nx) edges.push_back({id(x, y, z), id(x + 1, y, z), 1.0});
      }
    }
  }
  return Graph(nx * ny * nz, std::move(edges));
}

Graph make_geometric(int n, double radius, std::uint64_t seed) {
  if (n < 1) throw Error("geometric graph needs n >= 1");
  if (!(radius > 0.0)) throw Error("geometric graph needs radius > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> px(n), py(n);
  for (int i = 0; i < n; ++i) {
    px[i] = unit(rng);
    py[i] = unit(rng);
  }
  const double r2 = radius * radius;
  std::vector<WeightedEdge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = px[i] - px[j];
      const double dy = py[i] - py[j];
      if (dx * dx + dy * dy <= r2) edges.push_back({i, j, 1.0});
    }
  }
  return Graph(n, std::move(edges));
}

Graph make_chain_closures(int n, double p, std::uint64_t seed) {
  if (n < 2) throw Error("chain needs n >= 2");
  if (p < 0.0 || p > 1.0) throw Error("closure probability must be in [0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<WeightedEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (unit(rng) < p) edges.push_back({i, j, 1.0});
    }
  }
  return Graph(n, std::move(edges));
}

Graph make_random_connected(int n, int extra_edges, std::uint64_t seed,
                            double weight_min, double weight_max) {
  if (n < 2) throw Error("random graph needs n >= 2");
  if (extra_edges < 0) throw Error("extra_edges must be nonnegative");
  const long long complete = static_cast<long long>(n) * (n - 1) / 2;
  if (n - 1 + static_cast<long long>(extra_edges) > complete)
    throw Error("too many edges requested for " + std::to_string(n) +
                " nodes");
  if (!(weight_min > 0.0) || weight_max < weight_min)
    throw Error("bad weight range");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(weight_min, weight_max);
  std::vector<WeightedEdge> edges;
  std::set<std::pair<int, int>> used;

  // Random attachment tree keeps the graph connected by construction.
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    const int u = pick(rng);
    edges.push_back({u, v, weight(rng)});
    used.insert({u, v});
  }
  std::uniform_int_distribution<int> node(0, n - 1);
  int added = 0;
  while (added < extra_edges) {
    int u = node(rng);
    int v = node(rng);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!used.insert({u, v}).second) continue;
    edges.push_back({u, v, weight(rng)});
    ++added;
  }
  return Graph(n, std::move(edges));
}

}  // namespace macs
