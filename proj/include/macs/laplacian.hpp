#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "macs/graph.hpp"

namespace macs {

using SparseLaplacian = Eigen::SparseMatrix<double>;

// Weighted graph Laplacian in compressed sparse column form. The diagonal
// slot of every node is stored explicitly, even when its value is zero.
SparseLaplacian build_laplacian(const Graph& g);

// Laplacian of a single edge, n x n.
SparseLaplacian edge_laplacian(const WeightedEdge& e, int n);

// L(x) = L_fixed + sum_k x[k] * w_k * L(u_k, v_k).
SparseLaplacian selection_laplacian(const SparseLaplacian& fixed, int n,
                                    const std::vector<WeightedEdge>& candidates,
                                    const Eigen::VectorXd& x);

// Re-assembles L(x) for many values of x without changing the sparsity
// pattern: all candidate slots stay present where x[k] = 0, so downstream
// symbolic factorizations survive across iterations.
class LaplacianAssembler {
 public:
  LaplacianAssembler(const SparseLaplacian& fixed, int n,
                     const std::vector<WeightedEdge>& candidates);

  const SparseLaplacian& assemble(const Eigen::VectorXd& x);
  const SparseLaplacian& pattern() const { return matrix_; }
  int n() const { return static_cast<int>(matrix_.rows()); }
  int num_candidates() const { return static_cast<int>(slots_.size()); }

 private:
  struct Slot {
    int uu, vv, uv, vu;
    double weight;
  };
  SparseLaplacian matrix_;
  Eigen::VectorXd base_values_;
  std::vector<Slot> slots_;
};

bool is_symmetric(const SparseLaplacian& m, double tol = 1e-12);
double max_abs_row_sum(const SparseLaplacian& m);
bool is_valid_laplacian(const SparseLaplacian& m, std::string* why = nullptr);

// Connected components of the graph induced by numerically nonzero
// off-diagonal entries.
ComponentLabels laplacian_components(const SparseLaplacian& m);

}  // namespace macs
