#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "macs/graph.hpp"

namespace macs {

// chosen holds positions into the candidate vector (the same indexing as
// x), sorted ascending.
struct RoundedSelection {
  std::vector<int> chosen;
  std::string strategy;
  std::uint64_t seed = 0;
};

// K largest entries of x, ties by lower index.
RoundedSelection round_topk(const Eigen::VectorXd& x, int K);

// Madow systematic sampling: cumulative sums, one uniform draw, select k
// when some integer i in [0, K) lands in [c_{k-1}, c_k). Inclusion
// probability of k equals x_k.
RoundedSelection round_madow(const Eigen::VectorXd& x, int K,
                             std::uint64_t seed);

// Kruskal over the given weights, ties by lower edge index. restrict, when
// nonempty, limits the usable edges. Returns graph edge indices.
std::vector<int> maximum_spanning_tree(const Graph& g,
                                       const Eigen::VectorXd& weights,
                                       const std::vector<int>& restrict_to =
                                           {});

// Max spanning tree on x (fixed edges join for free), then top-up with the
// highest remaining x values until exactly K candidates are chosen.
RoundedSelection round_mst_connected(const Graph& g,
                                     const std::vector<int>& fixed,
                                     const std::vector<int>& candidates,
                                     const Eigen::VectorXd& x, int K);

// Tree as above; the K - |tree| remainder is Madow-sampled from the
// residual x renormalized over non-tree candidates.
RoundedSelection round_mst_madow(const Graph& g, const std::vector<int>& fixed,
                                 const std::vector<int>& candidates,
                                 const Eigen::VectorXd& x, int K,
                                 std::uint64_t seed);

enum class RoundingKind { Madow, TopK, Mst, MstMadow };
RoundingKind parse_rounding(const std::string& name);
std::string rounding_name(RoundingKind kind);

RoundedSelection round_selection(RoundingKind kind, const Graph& g,
                                 const std::vector<int>& fixed,
                                 const std::vector<int>& candidates,
                                 const Eigen::VectorXd& x, int K,
                                 std::uint64_t seed);

}  // namespace macs
