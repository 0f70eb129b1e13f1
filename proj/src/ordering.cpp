#include "macs/ordering.hpp"

#include <Eigen/OrderingMethods>

#include "macs/errors.hpp"

namespace macs {

std::vector<int> amd_ordering(const Eigen::SparseMatrix<double>& pattern) {
  if (pattern.rows() != pattern.cols())
    throw Error("ordering requires a square pattern");
  Eigen::AMDOrdering<int> amd;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
  amd(pattern, perm);
  const auto& idx = perm.indices();
  return std::vector<int>(idx.data(), idx.data() + idx.size());
}

}  // namespace macs
