#include "macs/cholesky.hpp"

#include <cmath>

namespace macs {

namespace {

// Elimination tree of the pattern (upper-triangular entries per column).
std::vector<int> elimination_tree(const Eigen::SparseMatrix<double>& A) {
  const int n = static_cast<int>(A.cols());
  std::vector<int> parent(n, -1), ancestor(n, -1);
  for (int k = 0; k < n; ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      int i = static_cast<int>(it.row());
      if (i >= k) continue;
      for (int j = i; j != -1 && j < k;) {
        const int next = ancestor[j];
        ancestor[j] = k;
        if (next == -1) {
          parent[j] = k;
          break;
        }
        j = next;
      }
    }
  }
  return parent;
}

}  // namespace

void SparseCholesky::analyze(const Eigen::SparseMatrix<double>& A) {
  if (A.rows() != A.cols()) throw Error("matrix must be square");
  n_ = static_cast<int>(A.rows());
  parent_ = elimination_tree(A);

  // Column counts of the factor via row subtree walks.
  std::vector<int> count(n_, 1);  // diagonal
  stamp_.assign(n_, -1);
  for (int k = 0; k < n_; ++k) {
    stamp_[k] = k;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      int i = static_cast<int>(it.row());
      if (i >= k) continue;
      for (int j = i; stamp_[j] != k; j = parent_[j]) {
        ++count[j];
        stamp_[j] = k;
      }
    }
  }

  col_ptr_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
  nnz_ = col_ptr_[n_];
  row_idx_.assign(nnz_, 0);
  values_.assign(nnz_, 0.0);
  next_.assign(n_, 0);
  stack_.assign(n_, 0);
  path_.assign(n_, 0);
  work_.assign(n_, 0.0);
  factorized_ = false;
}

void SparseCholesky::factorize(const Eigen::SparseMatrix<double>& A) {
  if (!analyzed() || A.rows() != n_ || A.cols() != n_)
    throw Error("factorize called before analyze");
  for (int j = 0; j < n_; ++j) next_[j] = col_ptr_[j];
  stamp_.assign(n_, -1);
  std::fill(work_.begin(), work_.end(), 0.0);

  for (int k = 0; k < n_; ++k) {
    // Row pattern of R(k, :) in etree topological order, values scattered
    // into the dense workspace.
    int top = n_;
    stamp_[k] = k;
    double diag = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (i > k) continue;
      if (i == k) {
        diag = it.value();
        continue;
      }
      work_[i] = it.value();
      int len = 0;
      for (int j = i; stamp_[j] != k; j = parent_[j]) {
        path_[len++] = j;
        stamp_[j] = k;
      }
      while (len > 0) stack_[--top] = path_[--len];
    }

    // Sparse triangular solve R(0:k,0:k) r^T = A(0:k,k).
    for (; top < n_; ++top) {
      const int i = stack_[top];
      const double rki = work_[i] / values_[col_ptr_[i]];
      work_[i] = 0.0;
      for (int p = col_ptr_[i] + 1; p < next_[i]; ++p)
        work_[row_idx_[p]] -= values_[p] * rki;
      diag -= rki * rki;
      const int p = next_[i]++;
      row_idx_[p] = k;
      values_[p] = rki;
    }

    if (diag <= 0.0 || !std::isfinite(diag)) {
      factorized_ = false;
      throw NotPositiveDefinite(k);
    }
    const int p = next_[k]++;
    row_idx_[p] = k;
    values_[p] = std::sqrt(diag);
  }
  factorized_ = true;
}

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = b;
  solve_in_place(x);
  return x;
}

void SparseCholesky::solve_in_place(Eigen::VectorXd& b) const {
  if (!factorized_) throw Error("solve called before factorize");
  if (b.size() != n_) throw Error("right-hand side has wrong dimension");
  double* x = b.data();
  for (int j = 0; j < n_; ++j) {
    x[j] /= values_[col_ptr_[j]];
    const double xj = x[j];
    for (int p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p)
      x[row_idx_[p]] -= values_[p] * xj;
  }
  for (int j = n_ - 1; j >= 0; --j) {
    double xj = x[j];
    for (int p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p)
      xj -= values_[p] * x[row_idx_[p]];
    x[j] = xj / values_[col_ptr_[j]];
  }
}

Eigen::SparseMatrix<double> SparseCholesky::factor() const {
  if (!factorized_) throw Error("factor requested before factorize");
  Eigen::SparseMatrix<double> R(n_, n_);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(nnz_);
  for (int j = 0; j < n_; ++j)
    for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
      t.emplace_back(row_idx_[p], j, values_[p]);
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

}  // namespace macs
