#include "macs/laplacian.hpp"

#include <cmath>
#include <cstring>
#include <vector>

namespace macs {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_edge_triplets(std::vector<Triplet>& t, NodeId u, NodeId v, double w) {
  t.emplace_back(u, u, w);
  t.emplace_back(v, v, w);
  t.emplace_back(u, v, -w);
  t.emplace_back(v, u, -w);
}

// Position of entry (row, col) in the value array, or -1.
int slot_index(const SparseLaplacian& m, int row, int col) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  for (int p = outer[col]; p < outer[col + 1]; ++p)
    if (inner[p] == row) return p;
  return -1;
}

}  // namespace

SparseLaplacian build_laplacian(const Graph& g) {
  std::vector<Triplet> t;
  t.reserve(g.num_nodes() + 4 * g.num_edges());
  for (int i = 0; i < g.num_nodes(); ++i) t.emplace_back(i, i, 0.0);
  for (const WeightedEdge& e : g.edges())
    add_edge_triplets(t, e.u, e.v, e.weight);
  SparseLaplacian L(g.num_nodes(), g.num_nodes());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

SparseLaplacian edge_laplacian(const WeightedEdge& e, int n) {
  std::vector<Triplet> t;
  add_edge_triplets(t, e.u, e.v, e.weight);
  SparseLaplacian L(n, n);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

SparseLaplacian selection_laplacian(const SparseLaplacian& fixed, int n,
                                    const std::vector<WeightedEdge>& candidates,
                                    const Eigen::VectorXd& x) {
  LaplacianAssembler assembler(fixed, n, candidates);
  return assembler.assemble(x);
}

LaplacianAssembler::LaplacianAssembler(
    const SparseLaplacian& fixed, int n,
    const std::vector<WeightedEdge>& candidates) {
  if (fixed.rows() != n || fixed.cols() != n)
    throw Error("fixed Laplacian has wrong dimensions");
  std::vector<Triplet> t;
  t.reserve(n + fixed.nonZeros() + 4 * candidates.size());
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, 0.0);
  for (int col = 0; col < fixed.outerSize(); ++col)
    for (SparseLaplacian::InnerIterator it(fixed, col); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (const WeightedEdge& e : candidates) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
      throw Error("candidate edge has invalid endpoints");
    add_edge_triplets(t, e.u, e.v, e.weight);
  }
  matrix_ = SparseLaplacian(n, n);
  matrix_.setFromTriplets(t.begin(), t.end());
  matrix_.makeCompressed();

  // Record the value-array slots touched by each candidate edge, then reset
  // the stored values to the fixed part alone.
  Eigen::VectorXd values =
      Eigen::Map<const Eigen::VectorXd>(matrix_.valuePtr(), matrix_.nonZeros());
  slots_.reserve(candidates.size());
  for (const WeightedEdge& e : candidates) {
    Slot s;
    s.uu = slot_index(matrix_, e.u, e.u);
    s.vv = slot_index(matrix_, e.v, e.v);
    s.uv = slot_index(matrix_, e.u, e.v);
    s.vu = slot_index(matrix_, e.v, e.u);
    s.weight = e.weight;
    if (s.uu < 0 || s.vv < 0 || s.uv < 0 || s.vu < 0)
      throw Error("candidate slot missing from the assembled pattern");
    slots_.push_back(s);
    values[s.uu] -= e.weight;
    values[s.vv] -= e.weight;
    values[s.uv] += e.weight;
    values[s.vu] += e.weight;
  }
  base_values_ = values;
}

const SparseLaplacian& LaplacianAssembler::assemble(const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(slots_.size()))
    throw Error("selection vector has wrong dimension");
  double* v = matrix_.valuePtr();
  std::memcpy(v, base_values_.data(), sizeof(double) * base_values_.size());
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const Slot& s = slots_[k];
    const double xw = x[static_cast<Eigen::Index>(k)] * s.weight;
    v[s.uu] += xw;
    v[s.vv] += xw;
    v[s.uv] -= xw;
    v[s.vu] -= xw;
  }
  return matrix_;
}

bool is_symmetric(const SparseLaplacian& m, double tol) {
  SparseLaplacian d = SparseLaplacian(m.transpose()) - m;
  for (int col = 0; col < d.outerSize(); ++col)
    for (SparseLaplacian::InnerIterator it(d, col); it; ++it)
      if (std::abs(it.value()) > tol) return false;
  return true;
}

double max_abs_row_sum(const SparseLaplacian& m) {
  Eigen::VectorXd sums = m * Eigen::VectorXd::Ones(m.cols());
  return sums.size() ? sums.cwiseAbs().maxCoeff() : 0.0;
}

bool is_valid_laplacian(const SparseLaplacian& m, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (m.rows() != m.cols()) return fail("matrix is not square");
  if (!is_symmetric(m)) return fail("matrix is not symmetric");
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseLaplacian::InnerIterator it(m, col); it; ++it) {
      if (it.row() == it.col()) {
        if (it.value() < -1e-12) return fail("negative diagonal entry");
      } else if (it.value() > 1e-12) {
        return fail("positive off-diagonal entry");
      }
    }
  }
  const double scale = m.nonZeros()
                           ? Eigen::Map<const Eigen::VectorXd>(
                                 m.valuePtr(), m.nonZeros())
                                 .cwiseAbs()
                                 .maxCoeff()
                           : 0.0;
  if (max_abs_row_sum(m) > 1e-10 * std::max(1.0, scale))
    return fail("row sums are not zero");
  return true;
}

ComponentLabels laplacian_components(const SparseLaplacian& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<int>> adj(n);
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseLaplacian::InnerIterator it(m, col); it; ++it)
      if (it.row() != it.col() && std::abs(it.value()) > 0.0)
        adj[it.col()].push_back(static_cast<int>(it.row()));

  ComponentLabels out;
  out.label.assign(n, -1);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (out.label[s] != -1) continue;
    const int c = out.count++;
    out.label[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v]) {
        if (out.label[w] == -1) {
          out.label[w] = c;
          stack.push_back(w);
        }
      }
    }
  }
  return out;
}

}  // namespace macs
