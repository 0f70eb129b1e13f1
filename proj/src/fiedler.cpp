#include "macs/fiedler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <random>

#include "macs/ordering.hpp"

namespace macs {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int find_slot(const SparseLaplacian& m, int row, int col) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  for (int p = outer[col]; p < outer[col + 1]; ++p)
    if (inner[p] == row) return p;
  return -1;
}

void canonicalize_sign(Eigen::VectorXd& q) {
  int imax = 0;
  q.cwiseAbs().maxCoeff(&imax);
  if (q[imax] < 0.0) q = -q;
}

}  // namespace

Eigen::VectorXd deflate(const Eigen::VectorXd& v) {
  const double n = static_cast<double>(v.size());
  return v.array() - v.sum() / n;
}

FiedlerSolver::FiedlerSolver(const SparseLaplacian& pattern,
                             const FiedlerOptions& opts)
    : opts_(opts) {
  const int n = static_cast<int>(pattern.rows());
  if (pattern.cols() != n) throw Error("Laplacian must be square");
  if (n < 2) throw Error("Fiedler pair needs at least two nodes");
  if (!pattern.isCompressed()) throw Error("pattern must be compressed");

  perm_ = amd_ordering(pattern);
  std::vector<int> inv(n);
  for (int i = 0; i < n; ++i) inv[perm_[i]] = i;

  const int nnz = static_cast<int>(pattern.nonZeros());
  const int* outer = pattern.outerIndexPtr();
  const int* inner = pattern.innerIndexPtr();
  src_outer_.assign(outer, outer + n + 1);
  src_inner_.assign(inner, inner + nnz);

  // Build the permuted pattern carrying source slot indices as values, so
  // the compressed layout hands us the value-shuffling map for free.
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(nnz);
  for (int c = 0; c < n; ++c)
    for (int s = outer[c]; s < outer[c + 1]; ++s)
      t.emplace_back(inv[inner[s]], inv[c], static_cast<double>(s));
  permuted_ = SparseLaplacian(n, n);
  permuted_.setFromTriplets(t.begin(), t.end());
  permuted_.makeCompressed();
  if (permuted_.nonZeros() != nnz)
    throw Error("pattern is not structurally symmetric");

  slot_map_.resize(nnz);
  for (int q = 0; q < nnz; ++q)
    slot_map_[q] = static_cast<int>(std::llround(permuted_.valuePtr()[q]));

  diag_.resize(n);
  for (int i = 0; i < n; ++i) {
    diag_[i] = find_slot(permuted_, i, i);
    if (diag_[i] < 0)
      throw Error("pattern is missing an explicit diagonal entry");
  }

  chol_.analyze(permuted_);
}

FiedlerPair FiedlerSolver::solve(const SparseLaplacian& L) {
  return run(L, nullptr);
}

FiedlerPair FiedlerSolver::solve(const SparseLaplacian& L,
                                 const Eigen::VectorXd& warm) {
  return run(L, &warm);
}

FiedlerPair FiedlerSolver::run(const SparseLaplacian& L,
                               const Eigen::VectorXd* warm) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n || n != static_cast<int>(permuted_.rows()))
    throw Error("Laplacian does not match the prepared pattern");
  if (L.nonZeros() != static_cast<Eigen::Index>(slot_map_.size()) ||
      std::memcmp(L.outerIndexPtr(), src_outer_.data(),
                  sizeof(int) * src_outer_.size()) != 0 ||
      std::memcmp(L.innerIndexPtr(), src_inner_.data(),
                  sizeof(int) * src_inner_.size()) != 0)
    throw Error("Laplacian does not match the prepared pattern");

  if (opts_.check_connectivity) {
    const ComponentLabels comp = laplacian_components(L);
    if (comp.count > 1) throw DisconnectedGraph(comp.count);
  }

  const double mean_diag = L.diagonal().sum() / n;
  const double sigma =
      std::isfinite(opts_.sigma) ? opts_.sigma : -1e-3 * mean_diag;
  stats_ = FiedlerStats{};
  stats_.sigma = sigma;

  const double* av = L.valuePtr();
  double* bv = permuted_.valuePtr();
  for (std::size_t q = 0; q < slot_map_.size(); ++q) bv[q] = av[slot_map_[q]];
  for (int i = 0; i < n; ++i) bv[diag_[i]] -= sigma;

  auto t0 = std::chrono::steady_clock::now();
  chol_.factorize(permuted_);
  stats_.factor_seconds = seconds_since(t0);
  stats_.factor_nonzeros = chol_.factor_nonzeros();

  Eigen::VectorXd buf(n);
  auto shift_invert = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd d = deflate(v);
    for (int i = 0; i < n; ++i) buf[i] = d[perm_[i]];
    chol_.solve_in_place(buf);
    for (int i = 0; i < n; ++i) d[perm_[i]] = buf[i];
    return deflate(d);
  };

  Eigen::VectorXd v0;
  if (warm) v0 = deflate(*warm);
  if (!warm || v0.norm() <= 1e-12) {
    std::mt19937_64 rng(opts_.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    v0.resize(n);
    for (int i = 0; i < n; ++i) v0[i] = unit(rng);
    v0 = deflate(v0);
  }

  KrylovOptions kopts;
  kopts.wanted = opts_.wanted;
  kopts.tol = opts_.tol;
  kopts.max_restarts = opts_.max_restarts;
  kopts.seed = opts_.seed ^ 0x9e3779b97f4a7c15ULL;
  t0 = std::chrono::steady_clock::now();
  KrylovResult kr = krylov_schur(shift_invert, v0, kopts);
  stats_.krylov_seconds = seconds_since(t0);
  stats_.restarts = kr.restarts;
  stats_.breakdown = kr.breakdown;

  // Recover eigenvalues of L from Ritz values of the shift-inverted
  // operator, sort ascending, break ties by Ritz residual.
  struct Candidate {
    double lambda;
    double residual;
    int index;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < kr.ritz_values.size(); ++i) {
    const double theta = kr.ritz_values[i];
    if (!(theta > 1e-14)) continue;  // deflated or unreachable directions
    cands.push_back({sigma + 1.0 / theta, kr.residuals[i],
                     static_cast<int>(i)});
  }
  if (cands.empty()) throw NoConvergence(kr.restarts, 1.0);
  std::sort(cands.begin(), cands.end(), [](const Candidate& a,
                                           const Candidate& b) {
    if (std::abs(a.lambda - b.lambda) >
        1e-12 * std::max(1.0, std::abs(a.lambda)))
      return a.lambda < b.lambda;
    return a.residual < b.residual;
  });

  FiedlerPair pair;
  pair.lambda2 = cands.front().lambda;
  pair.q2 = deflate(kr.ritz_vectors[cands.front().index]);
  const double qn = pair.q2.norm();
  if (qn <= 0.0) throw NoConvergence(kr.restarts, 1.0);
  pair.q2 /= qn;

  // Rayleigh-quotient polish with inverse iteration on the existing factor.
  const auto refine = [&](Eigen::VectorXd& q, double& lambda) {
    lambda = q.dot(L * q);
    return (L * q - lambda * q).norm();
  };
  double lambda = 0.0;
  double resid = refine(pair.q2, lambda);
  pair.lambda2 = lambda;
  for (int sweep = 0; sweep < 8; ++sweep) {
    if (resid <= 1e-9 * std::max(1.0, pair.lambda2)) break;
    Eigen::VectorXd y = shift_invert(pair.q2);
    const double yn = y.norm();
    if (!(yn > 0.0) || !y.allFinite()) break;
    y /= yn;
    double ly = 0.0;
    const double ry = refine(y, ly);
    if (ry >= resid) break;
    pair.q2 = y;
    pair.lambda2 = ly;
    resid = ry;
  }
  if (resid > 1e-8 * std::max(1.0, pair.lambda2))
    throw NoConvergence(kr.restarts, resid);
  if (pair.lambda2 < 0.0 && pair.lambda2 > -1e-10) pair.lambda2 = 0.0;
  canonicalize_sign(pair.q2);
  return pair;
}

FiedlerPair fiedler_shift_invert(const SparseLaplacian& L,
                                 const FiedlerOptions& opts) {
  FiedlerSolver solver(L, opts);
  return solver.solve(L);
}

FiedlerPair fiedler_shift_invert(const SparseLaplacian& L,
                                 const FiedlerOptions& opts,
                                 const Eigen::VectorXd& x0) {
  FiedlerSolver solver(L, opts);
  return solver.solve(L, x0);
}

FiedlerPair fiedler_dense_oracle(const Eigen::MatrixXd& L) {
  const int n = static_cast<int>(L.rows());
  if (n > 2000) throw TooLarge("dense oracle limited to n <= 2000");
  if (L.cols() != n || n < 2) throw Error("need a square matrix, n >= 2");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  if (es.info() != Eigen::Success) throw Error("dense eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev[0] < -1e-8 * scale) throw Error("matrix is not PSD");

  FiedlerPair pair;
  pair.lambda2 = std::max(0.0, ev[1]);
  // Pick the best-deflating vector within the lambda2 eigenspace; the
  // eigensolver may have mixed the all-ones direction into a degenerate
  // cluster.
  double best = -1.0;
  for (int j = 0; j < n; ++j) {
    if (std::abs(ev[j] - ev[1]) > 1e-9 * scale) continue;
    Eigen::VectorXd d = deflate(es.eigenvectors().col(j));
    const double nd = d.norm();
    if (nd > best) {
      best = nd;
      pair.q2 = d;
    }
  }
  if (best <= 1e-12) throw Error("degenerate eigenspace aligned with ones");
  pair.q2 /= best;
  canonicalize_sign(pair.q2);
  return pair;
}

}  // namespace macs
