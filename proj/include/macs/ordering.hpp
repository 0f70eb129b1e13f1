#pragma once

#include <Eigen/SparseCore>
#include <vector>

namespace macs {

// Fill-reducing ordering of a symmetric sparsity pattern. Returns p such
// that the permuted matrix B(i, j) = A(p[i], p[j]) factorizes with low fill;
// node p[i] is eliminated at step i.
std::vector<int> amd_ordering(const Eigen::SparseMatrix<double>& pattern);

}  // namespace macs
