#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <vector>

#include "macs/errors.hpp"

namespace macs {

// Up-looking sparse Cholesky A = R R^T with R lower triangular. The symbolic
// step (elimination tree + column counts) runs once per sparsity pattern;
// numeric refactorization reuses it. No internal permutation: callers order
// the matrix first.
class SparseCholesky {
 public:
  SparseCholesky() = default;

  void analyze(const Eigen::SparseMatrix<double>& A);
  void factorize(const Eigen::SparseMatrix<double>& A);
  void compute(const Eigen::SparseMatrix<double>& A) {
    analyze(A);
    factorize(A);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  void solve_in_place(Eigen::VectorXd& b) const;

  Eigen::SparseMatrix<double> factor() const;
  long long factor_nonzeros() const { return nnz_; }
  int rows() const { return n_; }
  bool analyzed() const { return n_ > 0; }
  bool factorized() const { return factorized_; }

 private:
  int n_ = 0;
  long long nnz_ = 0;
  bool factorized_ = false;
  std::vector<int> parent_;
  std::vector<int> col_ptr_;
  std::vector<int> row_idx_;
  std::vector<double> values_;
  // workspaces reused across factorizations
  std::vector<int> next_, stamp_, stack_, path_;
  std::vector<double> work_;
};

}  // namespace macs
