#include "macs/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace macs {

namespace {

// Classical Gram-Schmidt with one correction pass. Accumulates the
// projection coefficients onto the first `cols` columns into `coeffs`.
void orthogonalize(const Eigen::MatrixXd& V, int cols, Eigen::VectorXd& w,
                   Eigen::VectorXd* coeffs) {
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd h = V.leftCols(cols).transpose() * w;
    w.noalias() -= V.leftCols(cols) * h;
    if (coeffs) *coeffs += h;
  }
}

std::vector<int> by_magnitude(const Eigen::VectorXd& theta) {
  std::vector<int> idx(theta.size());
  for (int i = 0; i < theta.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(theta[a]) > std::abs(theta[b]);
  });
  return idx;
}

}  // namespace

KrylovResult krylov_schur(const LinearOperator& op, const Eigen::VectorXd& v0,
                          const KrylovOptions& opts) {
  const int n = static_cast<int>(v0.size());
  if (n < 1) throw Error("operator dimension must be positive");
  const double v0_norm = v0.norm();
  if (!(v0_norm > 0.0)) throw Error("start vector is zero");

  const int kw = std::min(std::max(1, opts.wanted), n);
  int m = opts.subspace > 0 ? opts.subspace : std::min(2 * kw + 10, n);
  m = std::min(std::max(m, kw + 1), n);

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m + 1);
  V.col(0) = v0 / v0_norm;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // Random direction orthogonal to the current basis, for breakdown
  // recovery. Fails (returns false) once the basis spans everything.
  auto inject = [&](int cols, Eigen::VectorXd& out) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) r[i] = unit(rng);
      orthogonalize(V, cols, r, nullptr);
      const double nrm = r.norm();
      if (nrm > 1e-8 * std::sqrt(static_cast<double>(n))) {
        out = r / nrm;
        return true;
      }
    }
    return false;
  };

  KrylovResult result;
  int cur = 0;       // first basis column not yet expanded
  bool exhausted = false;

  for (;;) {
    // Expand the basis to m + 1 vectors (or until the space runs out).
    int M = m;
    // Set when the tail vector is a breakdown injection the operator has not
    // seen yet; converging on the closed branch alone could miss pairs.
    bool fresh_tail = false;
    for (int i = cur; i < m; ++i) {
      fresh_tail = false;
      Eigen::VectorXd w = op(V.col(i));
      if (w.size() != n) throw Error("operator changed the dimension");
      Eigen::VectorXd h = Eigen::VectorXd::Zero(i + 1);
      orthogonalize(V, i + 1, w, &h);
      H.col(i).head(i + 1) = h;
      H.row(i).head(i + 1) = h.transpose();
      const double beta = w.norm();
      const double scale =
          std::max(1.0, std::max(h.cwiseAbs().maxCoeff(), std::abs(beta)));
      if (beta > 1e-13 * scale) {
        V.col(i + 1) = w / beta;
        H(i + 1, i) = beta;
        H(i, i + 1) = beta;
        continue;
      }
      // Breakdown: the branch closed on an invariant subspace.
      Eigen::VectorXd fresh;
      if (i + 1 < n && inject(i + 1, fresh)) {
        V.col(i + 1) = fresh;
        H(i + 1, i) = 0.0;
        H(i, i + 1) = 0.0;
        fresh_tail = true;
        continue;
      }
      M = i + 1;
      exhausted = true;
      break;
    }

    // Rayleigh-Ritz on the leading M x M block.
    Eigen::MatrixXd Hs =
        0.5 * (H.topLeftCorner(M, M) + H.topLeftCorner(M, M).transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs);
    if (es.info() != Eigen::Success) throw Error("dense eigensolver failed");
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& Y = es.eigenvectors();
    Eigen::VectorXd brow = exhausted ? Eigen::VectorXd::Zero(M)
                                     : Eigen::VectorXd(H.row(M).head(M));

    const std::vector<int> order = by_magnitude(theta);
    const int navail = std::min(kw, M);
    bool converged = !fresh_tail;
    double worst = 0.0;
    for (int j = 0; j < navail; ++j) {
      const int i = order[j];
      const double res = std::abs(brow.dot(Y.col(i)));
      worst = std::max(worst, res / std::max(1.0, std::abs(theta[i])));
      if (res > opts.tol * std::max(1.0, std::abs(theta[i])))
        converged = false;
    }

    if (converged || exhausted || result.restarts >= opts.max_restarts) {
      if (!converged && !exhausted)
        throw NoConvergence(result.restarts, worst);
      result.breakdown = exhausted;
      for (int j = 0; j < navail; ++j) {
        const int i = order[j];
        Eigen::VectorXd q = V.leftCols(M) * Y.col(i);
        q.normalize();
        result.ritz_values.push_back(theta[i]);
        result.residuals.push_back((op(q) - theta[i] * q).norm());
        result.ritz_vectors.push_back(std::move(q));
      }
      return result;
    }

    // Thick restart: keep the p Ritz pairs of largest magnitude plus the
    // residual direction.
    const int p = std::min(M - 1, std::max(kw + 1, M / 2));
    Eigen::MatrixXd Ysel(M, p);
    Eigen::VectorXd tsel(p);
    for (int j = 0; j < p; ++j) {
      Ysel.col(j) = Y.col(order[j]);
      tsel[j] = theta[order[j]];
    }
    Eigen::MatrixXd U = V.leftCols(M) * Ysel;
    Eigen::VectorXd bnew = Ysel.transpose() * brow;
    V.leftCols(p) = U;
    V.col(p) = V.col(M);
    for (int j = 0; j <= p; ++j) {
      Eigen::VectorXd c = V.col(j);
      if (j > 0) orthogonalize(V, j, c, nullptr);
      const double nrm = c.norm();
      if (nrm > 0.0) V.col(j) = c / nrm;
    }
    H.setZero();
    H.topLeftCorner(p, p) = tsel.asDiagonal();
    H.row(p).head(p) = bnew.transpose();
    H.col(p).head(p) = bnew;
    cur = p;
    ++result.restarts;
  }
}

}  // namespace macs
