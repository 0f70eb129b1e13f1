#pragma once

#include <Eigen/Dense>
#include <vector>

#include "macs/graph.hpp"
#include "macs/laplacian.hpp"

namespace macs {

struct EffectiveResistances {
  Eigen::VectorXd r;  // one (positive) resistance per queried edge
};

// r = (e_u - e_v)^T L^+ (e_u - e_v) per edge, via one grounded sparse
// factorization and one solve per edge. The grounded node drops out of the
// result; it is exposed only so tests can verify that.
EffectiveResistances effective_resistance(const SparseLaplacian& L,
                                          const std::vector<WeightedEdge>& edges,
                                          int ground = 0);
Eigen::VectorXd effective_resistance(const Graph& g, int ground = 0);

// Maximum spanning tree under weights r_k * w_k; the resulting n-1 edges
// form the fixed backbone E^f.
std::vector<int> spectral_backbone(const Graph& g);

// Returns the marked edges (or, when none are marked, the edges with
// |original u - original v| == 1) after validating that they span the graph.
std::vector<int> odometry_backbone(const Graph& g,
                                   const std::vector<int>& marked,
                                   const std::vector<long long>& original_ids =
                                       {});

}  // namespace macs
