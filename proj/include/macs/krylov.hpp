#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "macs/errors.hpp"

namespace macs {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovOptions {
  int subspace = 0;  // 0 picks min(2 * wanted + 10, n)
  int wanted = 1;
  double tol = 1e-10;
  int max_restarts = 300;
  std::uint64_t seed = 0x2545f4914f6cdd1dULL;  // breakdown recovery draws
};

struct KrylovResult {
  std::vector<double> ritz_values;  // sorted by |theta| descending
  std::vector<Eigen::VectorXd> ritz_vectors;
  std::vector<double> residuals;  // ||T v - theta v|| per returned pair
  int restarts = 0;
  // The reachable invariant subspace was exhausted; all pairs spanned by it
  // are returned (possibly fewer than wanted).
  bool breakdown = false;
};

// Symmetric Krylov-Schur (thick-restart Lanczos) for the pairs of largest
// magnitude of a self-adjoint operator.
KrylovResult krylov_schur(const LinearOperator& op, const Eigen::VectorXd& v0,
                          const KrylovOptions& opts = {});

}  // namespace macs
