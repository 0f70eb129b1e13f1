#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "macs/cholesky.hpp"
#include "macs/krylov.hpp"
#include "macs/laplacian.hpp"

namespace macs {

struct FiedlerPair {
  double lambda2 = 0.0;
  Eigen::VectorXd q2;
};

struct FiedlerOptions {
  // NaN selects -1e-3 * (mean diagonal of L); must stay negative for PSD L.
  double sigma = std::numeric_limits<double>::quiet_NaN();
  int wanted = 1;
  double tol = 1e-10;  // Ritz residual tolerance on the shift-inverted op
  int max_restarts = 300;
  std::uint64_t seed = 20240901;  // start vector draw
  bool check_connectivity = true;
};

struct FiedlerStats {
  double sigma = 0.0;
  int restarts = 0;
  bool breakdown = false;
  long long factor_nonzeros = 0;
  double factor_seconds = 0.0;
  double krylov_seconds = 0.0;
};

// P(v) = v - (1^T v / n) 1.
Eigen::VectorXd deflate(const Eigen::VectorXd& v);

// Shift-invert Fiedler solver bound to one sparsity pattern: ordering and
// symbolic factorization happen once, numeric refactorization per solve.
class FiedlerSolver {
 public:
  explicit FiedlerSolver(const SparseLaplacian& pattern,
                         const FiedlerOptions& opts = {});

  FiedlerPair solve(const SparseLaplacian& L);
  FiedlerPair solve(const SparseLaplacian& L, const Eigen::VectorXd& warm);
  const FiedlerStats& stats() const { return stats_; }
  const std::vector<int>& permutation() const { return perm_; }
  long long factor_nonzeros() const { return chol_.factor_nonzeros(); }

 private:
  FiedlerPair run(const SparseLaplacian& L, const Eigen::VectorXd* warm);

  FiedlerOptions opts_;
  FiedlerStats stats_;
  std::vector<int> perm_;      // new index -> old index
  std::vector<int> slot_map_;  // permuted value slot -> source value slot
  std::vector<int> diag_;      // permuted diagonal slot per new index
  std::vector<int> src_outer_, src_inner_;  // pattern fingerprint
  SparseLaplacian permuted_;
  SparseCholesky chol_;
};

FiedlerPair fiedler_shift_invert(const SparseLaplacian& L,
                                 const FiedlerOptions& opts = {});
FiedlerPair fiedler_shift_invert(const SparseLaplacian& L,
                                 const FiedlerOptions& opts,
                                 const Eigen::VectorXd& x0);

// Full dense eigendecomposition; testing oracle. Throws TooLarge for
// n > 2000.
FiedlerPair fiedler_dense_oracle(const Eigen::MatrixXd& L);

}  // namespace macs
